#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tlnp/dataset.hpp"

namespace tlnp {

// Three Gaussian classes with identity covariance. Means given as one value
// per coordinate, or a single value broadcast to every coordinate.
struct GaussianSpec {
    std::size_t dim = 15;
    std::vector<double> mean_normal{0.0};
    std::vector<double> mean_target_abnormal{0.5};
    std::vector<double> mean_source_abnormal{0.5};
    std::size_t n_normal = 4000;
    std::size_t n_target = 50;
    std::size_t n_source = 2500;
    std::size_t n_normal_test = 4000;
    std::size_t n_target_test = 2000;
    std::size_t n_source_test = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Each (role, split) pair draws from its own RNG stream.
DatasetBundle gen_gaussian(const GaussianSpec& spec);

// Deterministic shuffled partition. Part sizes are floor(n * fraction) with
// the remainder added to the first part. Throws SplitError when n is smaller
// than the number of parts, ConfigError when fractions do not sum to 1.
std::vector<Dataset> split(const Dataset& data, const std::vector<double>& fractions,
                           std::uint64_t seed);

// Per-feature affine map fitted on training normal data.
struct Standardizer {
    Vector mean;
    Vector scale;

    static Standardizer fit(const Dataset& data);
    void apply(Dataset& data) const;
    void apply(DatasetBundle& bundle) const;
};

// Nearest-rank percentile: the value at rank ceil(p/100 * n) of the sorted
// sample (rank clamped to [1, n]).
double nearest_rank_percentile(std::vector<double> values, double percentile);

struct CsvIngestSpec {
    std::filesystem::path path;
    std::vector<std::string> feature_columns;
    std::string label_column;
    double percentile = 95.0;
    std::vector<double> split_fractions{0.7, 0.3};
    std::uint64_t seed = 0;
    bool standardize = true;
    // Where rows above the percentile go.
    Role abnormal_role = Role::target_abnormal;
    // Largest tolerated fraction of unparseable rows.
    double max_bad_fraction = 0.1;

    void validate() const;
};

struct CsvIngestResult {
    DatasetBundle bundle;
    double threshold = 0.0;
    std::size_t total_rows = 0;
    std::size_t abnormal_rows = 0;
    std::size_t dropped_missing = 0;
    std::size_t dropped_unparseable = 0;
    std::optional<Standardizer> standardizer;
};

// Labels a row abnormal iff its label value exceeds the percentile of the
// label column, splits each class by split_fractions (train, test) and
// optionally standardizes with training-normal statistics.
CsvIngestResult ingest_csv(const CsvIngestSpec& spec);

void to_json(nlohmann::json& j, const GaussianSpec& spec);
void from_json(const nlohmann::json& j, GaussianSpec& spec);
void to_json(nlohmann::json& j, const CsvIngestSpec& spec);
void from_json(const nlohmann::json& j, CsvIngestSpec& spec);

}  // namespace tlnp
