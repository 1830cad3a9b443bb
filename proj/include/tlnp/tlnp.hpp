#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tlnp/dataset.hpp"
#include "tlnp/losses.hpp"
#include "tlnp/models.hpp"
#include "tlnp/trainer.hpp"

namespace tlnp {

enum class FilterMode { constant_c, variance_method };

FilterMode parse_filter_mode(std::string_view name);
std::string_view to_string(FilterMode mode);

struct TlnpConfig {
    double alpha = 0.05;
    double epsilon0 = 0.01;
    std::vector<double> lambda_s_grid{0, 0.05, 0.1, 0.5, 1, 5, 10, 20, 40, 60, 80, 100};
    double c_universal = 0.5;
    std::size_t max_tune_attempts = 60;
    double lambda0_min = 1e-6;
    double lambda0_max = 1e8;
    double lambda_s_min = 1e-3;
    double lambda_s_max = 1e4;
    std::size_t min_successes = 5;
    std::size_t target_success_count = 12;
    FilterMode filter_mode = FilterMode::constant_c;
    double initial_lambda0 = 1.0;
    double initial_increment = 0.5;
    // Seed of the 70/30 target split used by the variance filter.
    std::uint64_t split_seed = 0;
    // Grid points trained concurrently.
    std::size_t workers = 1;

    void validate() const;
    double band_low() const { return alpha - epsilon0 / 2; }
    double band_high() const { return alpha + epsilon0 / 2; }
};

// Everything needed to turn (lambda_s, lambda_0) into a trained model.
struct Learner {
    ModelKind kind = ModelKind::quadratic;
    Architecture arch;
    SurrogateLossSpec loss;
    TrainConfig train;
};

// Element of the reduced class: a tuned model with its training errors.
struct TunedHypothesis {
    Model model;
    double lambda_s = 0.0;
    double lambda_0 = 0.0;
    double train_type1 = 0.0;
    double train_target_type2 = 0.0;
    std::optional<double> train_source_type2;
    // Order in which the grid point was evaluated; final tie-breaker.
    std::size_t grid_index = 0;
};

// Trains one model for the given weights.
using Fitter = std::function<Model(double lambda_s, double lambda_0)>;

// Fitter that cold-starts every attempt from a seed derived from
// (learner.train.seed, lambda_s). data must outlive the returned fitter.
Fitter make_fitter(const Learner& learner, const TrainingSet& data);

struct TuneAttempt {
    double lambda_0 = 0.0;
    double type1 = 0.0;
};

struct TuneOutcome {
    double lambda_s = 0.0;
    std::optional<TunedHypothesis> hypothesis;
    std::vector<TuneAttempt> trajectory;
    // Empty on success.
    std::string failure;

    bool accepted() const { return hypothesis.has_value(); }
};

// Multiplicative search on lambda_0 until the training 0-1 Type-I lands in
// [alpha - eps0/2, alpha + eps0/2]. Overshoot multiplies by (1 + f),
// undershoot by (1 - f); f halves whenever the direction flips.
TuneOutcome tune_lambda0(double lambda_s, const Fitter& fit, const TrainingSet& data,
                         const TlnpConfig& cfg, std::size_t grid_index = 0);

struct GridPointRecord {
    double lambda_s = 0.0;
    std::size_t grid_index = 0;
    std::size_t round = 0;
    std::vector<TuneAttempt> trajectory;
    bool accepted = false;
    std::string failure;
};

struct Step1Result {
    std::vector<TunedHypothesis> members;
    std::vector<GridPointRecord> records;
};

// Tunes lambda_0 for every lambda_s in the grid and expands the grid while
// fewer than target_success_count points succeed. Throws AlgorithmFailure when
// fewer than max(1, min_successes) points succeed.
Step1Result step1_grid(const Fitter& fit, const TrainingSet& data, const TlnpConfig& cfg);

// Candidate lambda_s values for the next expansion round: geometric midpoints
// between adjacent tried values whose outcomes differ and whose ratio exceeds
// 2, plus one octave past each end, all inside [lambda_s_min, lambda_s_max].
std::vector<double> expansion_candidates(const std::vector<GridPointRecord>& tried,
                                         const TlnpConfig& cfg);

// Result of a Step-2 filter. Indices refer to the input class.
struct FilterResult {
    std::vector<std::size_t> kept;
    std::optional<std::size_t> reference;  // index of h_T when it belongs to the class
    double reference_type2 = 0.0;
    double slack = 0.0;
    double threshold = 0.0;
    std::optional<double> variance;
};

// Keeps members whose target 0-1 Type-II is within c / sqrt(n_T) of the best.
FilterResult step2_filter(const std::vector<TunedHypothesis>& hypotheses,
                          const Dataset& target_train, double c);

// Population variance of the +-1 outputs of sign(h) over the rows.
double sign_output_variance(const Model& model, const Dataset& data);

// Variance filter against an externally trained reference h_T, all errors on
// target_part: keep h with R(h) <= R(h_T) + sqrt(VAR / n).
FilterResult variance_filter(const std::vector<TunedHypothesis>& hypotheses,
                             const Model& reference, const Dataset& target_part);

// 70/30 split of the target abnormal data used by the variance filter.
struct TargetSplit {
    Dataset fit;       // 70%, used to build the reduced class
    Dataset evaluate;  // 30%, used to train h_T
};
TargetSplit split_target_for_variance(const Dataset& target_full, std::uint64_t seed);

// Reruns Step 1 with lambda_s = 0 on the 30% part plus the normal data to
// obtain h_T, then applies variance_filter on the 70% part. hypotheses must
// have been built from the 70% part.
FilterResult step2_variance_filter(const std::vector<TunedHypothesis>& hypotheses,
                                   const Dataset& target_full, const Dataset& normal,
                                   const Learner& learner, const TlnpConfig& cfg);

// Argmin of source 0-1 Type-II; with empty source, argmin of the stored
// target Type-II. Ties: smallest lambda_s, then lambda_0, then grid index.
TunedHypothesis step3_select(const std::vector<TunedHypothesis>& filtered,
                             const Dataset& source_train);

struct TlnpResult {
    TunedHypothesis selected;
    Step1Result step1;
    FilterResult step2;
    std::optional<Model> reference_model;  // h_T of the variance filter
};

TlnpResult run_tlnp(const Learner& learner, const TrainingSet& data, const TlnpConfig& cfg);

// Constant-c pipeline over an arbitrary fitter.
TlnpResult run_tlnp(const Fitter& fit, const TrainingSet& data, const TlnpConfig& cfg);

// Strict ordering used for every tie-break.
bool tie_break_less(const TunedHypothesis& a, const TunedHypothesis& b);

void to_json(nlohmann::json& j, const TunedHypothesis& h);
void from_json(const nlohmann::json& j, TunedHypothesis& h);
void to_json(nlohmann::json& j, const TlnpConfig& cfg);
void from_json(const nlohmann::json& j, TlnpConfig& cfg);
// Audit record: grid points, trajectories, filter outcome, selection.
nlohmann::json audit_json(const TlnpResult& result);

}  // namespace tlnp
