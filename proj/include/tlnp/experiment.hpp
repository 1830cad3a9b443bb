#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tlnp/data.hpp"
#include "tlnp/tlnp.hpp"

namespace tlnp {

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> names{
        "tlnp",           "tlnp_variance", "only_target_np", "only_source_np", "pooled_np",
        "threshold_target", "threshold_pooled", "tlod",       "oracle_fixture"};
    return names;
}

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);
void to_json(nlohmann::json& j, const SurrogateLossSpec& spec);
void from_json(const nlohmann::json& j, SurrogateLossSpec& spec);

struct CsvSource {
    CsvIngestSpec target;
    // Only its abnormal rows are used; normal data always comes from the target.
    std::optional<CsvIngestSpec> source;
};

using DataSource = std::variant<GaussianSpec, CsvSource>;

enum class SweepVariable { n_source, n_target };

struct SweepSpec {
    SweepVariable variable = SweepVariable::n_source;
    std::vector<double> values;
};

struct ExperimentConfig {
    DataSource data = GaussianSpec{};
    std::vector<std::string> methods{"tlnp", "only_target_np"};
    double alpha = 0.05;
    double epsilon0 = 0.01;
    std::size_t runs = 10;
    std::uint64_t master_seed = 0;
    std::optional<SweepSpec> sweep;
    ModelKind model_kind = ModelKind::quadratic;
    std::size_t hidden_units = 62;
    SurrogateLossSpec loss;
    TrainConfig train;
    TlnpConfig tlnp;
    std::size_t workers = 1;

    void validate() const;
    // Sweep values, or a single placeholder 0 when no sweep is configured.
    std::vector<double> sweep_points() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

// Stable 64-bit hash of the canonical JSON form.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t hash);

// Overrides master_seed from TLNP_MASTER_SEED and workers from TLNP_WORKERS.
void apply_env_overrides(ExperimentConfig& cfg);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Bundle for one (sweep value, run). The seed depends on (master_seed, run)
// only: every sweep value sees the same draws, and the swept dataset is
// truncated to the requested size.
DatasetBundle build_run_data(const ExperimentConfig& cfg, double sweep_value, std::size_t run);

std::uint64_t data_seed(std::uint64_t master_seed, std::size_t run);
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t run, const std::string& method);

struct CellResult {
    std::string method;
    double sweep_value = 0.0;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double train_type1 = 0.0;
    double train_type2 = 0.0;
    double test_type1 = 0.0;
    double test_type2 = 0.0;
    double lambda_s = 0.0;
    double lambda_0 = 0.0;
    double wall_seconds = 0.0;
    nlohmann::json audit;  // null unless the method produces one

    friend bool operator==(const CellResult&, const CellResult&) = default;
};

struct Aggregate {
    std::string method;
    double sweep_value = 0.0;
    std::size_t runs_ok = 0;
    std::size_t runs_failed = 0;
    double test_type2_mean = 0.0;
    double test_type2_std = 0.0;
    double test_type1_mean = 0.0;
    double test_type1_std = 0.0;
    double train_type1_mean = 0.0;

    friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct ExperimentReport {
    nlohmann::json config;
    std::string config_hash;
    std::optional<std::string> sweep_variable;
    std::vector<CellResult> cells;
    std::vector<Aggregate> aggregates;
    std::vector<std::string> warnings;

    friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

// Learner and TLNP settings a cell with the given seed uses.
Learner learner_for(const ExperimentConfig& cfg, std::size_t dim, std::uint64_t seed);
TlnpConfig tlnp_config_for(const ExperimentConfig& cfg, std::uint64_t seed);

// Runs one method on one bundle; failures are reported through CellResult.
CellResult run_cell(const ExperimentConfig& cfg, const std::string& method,
                    const DatasetBundle& bundle, double sweep_value, std::size_t run);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Mean and sample standard deviation over successful cells.
std::vector<Aggregate> aggregate_cells(const std::vector<CellResult>& cells,
                                       const std::vector<std::string>& methods,
                                       const std::vector<double>& sweep_values);

// include_timing adds wall-clock seconds, which are otherwise left out so the
// record is byte-identical across reruns.
nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing);
ExperimentReport report_from_json(const nlohmann::json& j);

struct ReportFormats {
    bool json = true;
    bool csv = true;
    bool plot = true;
};

// Writes report.json (+ timing.json), aggregate.csv, table.csv and one
// plot_<method>.dat per method into dir. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               ReportFormats formats = {});

}  // namespace tlnp
