#include "tlnp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tlnp/error.hpp"
#include "tlnp/risk.hpp"

namespace tlnp {
namespace {

TlnpConfig target_only_config(const TlnpConfig& cfg) {
    TlnpConfig out = cfg;
    out.lambda_s_grid = {0.0};
    out.min_successes = 1;
    out.target_success_count = 1;
    out.filter_mode = FilterMode::constant_c;
    return out;
}

Dataset empty_like(const Dataset& data, Role role) {
    return Dataset{Matrix(0, data.X.cols()), role, data.split};
}

TunedHypothesis target_only(const Learner& learner, const TrainingSet& view,
                            const TlnpConfig& cfg) {
    return run_tlnp(learner, view, target_only_config(cfg)).selected;
}

// Reports training Type-II against the caller's original target and source.
TunedHypothesis relabel(TunedHypothesis h, const TrainingSet& data) {
    if (!data.target.empty()) h.train_target_type2 = zero_one_type2(h.model, data.target);
    if (!data.source.empty()) {
        h.train_source_type2 = zero_one_type2(h.model, data.source);
    } else {
        h.train_source_type2.reset();
    }
    return h;
}

}  // namespace

TunedHypothesis only_target_np(const Learner& learner, const TrainingSet& data,
                               const TlnpConfig& cfg) {
    const TrainingSet view{data.normal, data.target,
                           empty_like(data.normal, Role::source_abnormal)};
    return relabel(target_only(learner, view, cfg), data);
}

TunedHypothesis only_source_np(const Learner& learner, const TrainingSet& data,
                               const TlnpConfig& cfg) {
    if (data.source.empty()) throw UndefinedError("only-source NP needs source abnormal data");
    const TrainingSet view{data.normal, data.source,
                           empty_like(data.normal, Role::source_abnormal)};
    return relabel(target_only(learner, view, cfg), data);
}

TunedHypothesis pooled_np(const Learner& learner, const TrainingSet& data, const TlnpConfig& cfg) {
    const TrainingSet view{data.normal, concatenate(data.target, data.source),
                           empty_like(data.normal, Role::source_abnormal)};
    return relabel(target_only(learner, view, cfg), data);
}

double threshold_shift(std::vector<double> normal_scores, double alpha) {
    if (normal_scores.empty()) throw UndefinedError("threshold needs normal scores");
    std::sort(normal_scores.begin(), normal_scores.end(), std::greater<>());
    const auto n = normal_scores.size();
    const auto allowed = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));
    if (allowed >= n) {
        // Every normal point may be flagged.
        return normal_scores.back();
    }
    const double below = normal_scores[allowed];
    if (allowed == 0) {
        return std::nextafter(below, std::numeric_limits<double>::infinity());
    }
    const double above = normal_scores[allowed - 1];
    if (above > below) return below + (above - below) / 2.0;
    return std::nextafter(below, std::numeric_limits<double>::infinity());
}

TunedHypothesis threshold_classifier(const Learner& learner, const TrainingSet& data,
                                     const TlnpConfig& cfg, bool pool_source) {
    const Dataset abnormal = pool_source ? concatenate(data.target, data.source) : data.target;
    if (abnormal.empty()) throw UndefinedError("thresholding needs abnormal data");
    const TrainingSet view{data.normal, abnormal, empty_like(data.normal, Role::source_abnormal)};
    Model model = make_fitter(learner, view)(0.0, 1.0);

    const Vector scores = forward_rows(model, data.normal.X);
    double shift = threshold_shift({scores.data(), scores.data() + scores.size()}, cfg.alpha);
    const double original_bias = model.bias();
    model.bias() = original_bias - shift;
    // Rounding in the shifted bias can flip a point sitting on the boundary.
    double gap = std::max(std::abs(shift), 1.0) * std::numeric_limits<double>::epsilon();
    while (zero_one_type1(model, data.normal) > cfg.alpha) {
        shift += gap;
        gap *= 2.0;
        model.bias() = original_bias - shift;
    }

    TunedHypothesis h;
    h.train_type1 = zero_one_type1(model, data.normal);
    h.train_target_type2 = zero_one_type2(model, data.target);
    if (!data.source.empty()) h.train_source_type2 = zero_one_type2(model, data.source);
    h.model = std::move(model);
    h.lambda_s = 0.0;
    h.lambda_0 = 1.0;
    return h;
}

TunedHypothesis tlod(const Learner& learner, const TrainingSet& data, const TlnpConfig& cfg) {
    if (data.source.empty() || data.target.empty()) {
        throw UndefinedError("TLOD needs both source and target abnormal data");
    }
    TunedHypothesis from_target = only_target_np(learner, data, cfg);
    TunedHypothesis from_source = only_source_np(learner, data, cfg);
    const double target_err = zero_one_type2(from_target.model, data.target);
    const double source_err = zero_one_type2(from_source.model, data.target);
    return source_err < target_err ? from_source : from_target;
}

}  // namespace tlnp
