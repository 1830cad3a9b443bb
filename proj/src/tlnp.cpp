#include "tlnp/tlnp.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tlnp/data.hpp"
#include "tlnp/error.hpp"
#include "tlnp/risk.hpp"
#include "tlnp/seed.hpp"

namespace tlnp {
namespace {

TunedHypothesis describe(Model model, double lambda_s, double lambda_0, double type1,
                         const TrainingSet& data, std::size_t grid_index) {
    TunedHypothesis h;
    h.train_target_type2 = zero_one_type2(model, data.target);
    if (!data.source.empty()) {
        h.train_source_type2 = zero_one_type2(model, data.source);
    }
    h.model = std::move(model);
    h.lambda_s = lambda_s;
    h.lambda_0 = lambda_0;
    h.train_type1 = type1;
    h.grid_index = grid_index;
    return h;
}

std::string format_record(const GridPointRecord& r) {
    std::ostringstream out;
    out << "lambda_s=" << r.lambda_s << " attempts=" << r.trajectory.size();
    if (!r.trajectory.empty()) {
        out << " last_lambda_0=" << r.trajectory.back().lambda_0
            << " last_type1=" << r.trajectory.back().type1;
    }
    out << (r.accepted ? " accepted" : " failed: " + r.failure);
    return out.str();
}

// Applies the tie-break order among members whose key equals the minimum.
template <typename Key>
std::size_t argmin_by(const std::vector<TunedHypothesis>& hs, Key key) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < hs.size(); ++i) {
        const double ki = key(i);
        const double kb = key(best);
        if (ki < kb || (ki == kb && tie_break_less(hs[i], hs[best]))) best = i;
    }
    return best;
}

FilterResult filter_by_slack(const std::vector<TunedHypothesis>& hs,
                             const std::vector<double>& type2, double reference_type2,
                             double slack) {
    FilterResult out;
    out.reference_type2 = reference_type2;
    out.slack = slack;
    out.threshold = reference_type2 + slack;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (type2[i] <= out.threshold) out.kept.push_back(i);
    }
    return out;
}

}  // namespace

FilterMode parse_filter_mode(std::string_view name) {
    if (name == "constant_c") return FilterMode::constant_c;
    if (name == "variance_method") return FilterMode::variance_method;
    throw ConfigError("unknown filter mode: " + std::string(name));
}

std::string_view to_string(FilterMode mode) {
    return mode == FilterMode::constant_c ? "constant_c" : "variance_method";
}

void TlnpConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(epsilon0 > 0.0 && epsilon0 < alpha)) throw ConfigError("epsilon0 must lie in (0, alpha)");
    if (lambda_s_grid.empty()) throw ConfigError("lambda_s grid must not be empty");
    for (std::size_t i = 0; i < lambda_s_grid.size(); ++i) {
        if (!(lambda_s_grid[i] >= 0.0)) throw ConfigError("lambda_s grid must be non-negative");
        if (i > 0 && !(lambda_s_grid[i] > lambda_s_grid[i - 1])) {
            throw ConfigError("lambda_s grid must be strictly increasing");
        }
    }
    if (!(c_universal >= 0.0)) throw ConfigError("c must be non-negative");
    if (max_tune_attempts < 1) throw ConfigError("max_tune_attempts must be at least 1");
    if (!(lambda0_min > 0.0 && lambda0_min < lambda0_max)) throw ConfigError("bad lambda_0 bounds");
    if (!(lambda_s_min > 0.0 && lambda_s_min < lambda_s_max)) throw ConfigError("bad lambda_s bounds");
    if (!(initial_increment > 0.0 && initial_increment < 1.0)) {
        throw ConfigError("initial increment factor must lie in (0, 1)");
    }
    if (!(initial_lambda0 >= lambda0_min && initial_lambda0 <= lambda0_max)) {
        throw ConfigError("initial lambda_0 outside its bounds");
    }
}

bool tie_break_less(const TunedHypothesis& a, const TunedHypothesis& b) {
    if (a.lambda_s != b.lambda_s) return a.lambda_s < b.lambda_s;
    if (a.lambda_0 != b.lambda_0) return a.lambda_0 < b.lambda_0;
    return a.grid_index < b.grid_index;
}

Fitter make_fitter(const Learner& learner, const TrainingSet& data) {
    return [&learner, &data](double lambda_s, double lambda_0) {
        TrainConfig cfg = learner.train;
        cfg.seed = combine_seed(learner.train.seed, lambda_s);
        return train(learner.kind, learner.arch, learner.loss, data, lambda_s, lambda_0, cfg);
    };
}

TuneOutcome tune_lambda0(double lambda_s, const Fitter& fit, const TrainingSet& data,
                         const TlnpConfig& cfg, std::size_t grid_index) {
    TuneOutcome outcome;
    outcome.lambda_s = lambda_s;
    double lambda_0 = cfg.initial_lambda0;
    double factor = cfg.initial_increment;
    int previous_direction = 0;

    for (std::size_t attempt = 0; attempt < cfg.max_tune_attempts; ++attempt) {
        Model model;
        try {
            model = fit(lambda_s, lambda_0);
        } catch (const TrainingDiverged& e) {
            outcome.failure = std::string("training diverged: ") + e.what();
            return outcome;
        }
        const double type1 = zero_one_type1(model, data.normal);
        outcome.trajectory.push_back({lambda_0, type1});

        if (type1 >= cfg.band_low() && type1 <= cfg.band_high()) {
            outcome.hypothesis = describe(std::move(model), lambda_s, lambda_0, type1, data, grid_index);
            return outcome;
        }
        // Overshoot pushes harder on the normal class, undershoot relaxes.
        const int direction = type1 > cfg.band_high() ? 1 : -1;
        if (previous_direction != 0 && direction != previous_direction) factor /= 2.0;
        previous_direction = direction;
        lambda_0 *= direction > 0 ? 1.0 + factor : 1.0 - factor;

        if (lambda_0 < cfg.lambda0_min || lambda_0 > cfg.lambda0_max) {
            outcome.failure = "lambda_0 left its bounds";
            return outcome;
        }
    }
    outcome.failure = "attempts exhausted";
    return outcome;
}

std::vector<double> expansion_candidates(const std::vector<GridPointRecord>& tried,
                                         const TlnpConfig& cfg) {
    std::vector<std::pair<double, bool>> points;
    for (const auto& r : tried) {
        if (r.lambda_s > 0.0) points.emplace_back(r.lambda_s, r.accepted);
    }
    std::sort(points.begin(), points.end());
    std::set<double> seen;
    for (const auto& r : tried) seen.insert(r.lambda_s);

    std::vector<double> out;
    auto offer = [&](double value) {
        if (value < cfg.lambda_s_min || value > cfg.lambda_s_max) return;
        if (seen.count(value) != 0) return;
        seen.insert(value);
        out.push_back(value);
    };
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto [a, ok_a] = points[i];
        const auto [b, ok_b] = points[i + 1];
        if (ok_a != ok_b && b / a > 2.0) offer(std::sqrt(a * b));
    }
    if (!points.empty()) {
        offer(points.front().first / 2.0);
        offer(points.back().first * 2.0);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Step1Result step1_grid(const Fitter& fit, const TrainingSet& data, const TlnpConfig& cfg) {
    cfg.validate();
    Step1Result result;
    std::vector<double> pending = cfg.lambda_s_grid;
    std::size_t round = 0;
    const std::size_t workers = std::max<std::size_t>(cfg.workers, 1);

    while (!pending.empty() && result.members.size() < cfg.target_success_count) {
        for (std::size_t start = 0; start < pending.size(); start += workers) {
            if (result.members.size() >= cfg.target_success_count) break;
            const std::size_t stop = std::min(pending.size(), start + workers);
            std::vector<TuneOutcome> outcomes(stop - start);
            const std::size_t base_index = result.records.size();
            if (workers == 1) {
                outcomes[0] = tune_lambda0(pending[start], fit, data, cfg, base_index);
            } else {
                std::vector<std::future<TuneOutcome>> jobs;
                for (std::size_t i = start; i < stop; ++i) {
                    jobs.push_back(std::async(std::launch::async, [&, i] {
                        return tune_lambda0(pending[i], fit, data, cfg, base_index + (i - start));
                    }));
                }
                for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = jobs[i].get();
            }
            for (auto& o : outcomes) {
                if (result.members.size() >= cfg.target_success_count) break;
                GridPointRecord rec;
                rec.lambda_s = o.lambda_s;
                rec.grid_index = result.records.size();
                rec.round = round;
                rec.trajectory = o.trajectory;
                rec.accepted = o.accepted();
                rec.failure = o.failure;
                if (o.hypothesis) {
                    o.hypothesis->grid_index = rec.grid_index;
                    result.members.push_back(std::move(*o.hypothesis));
                }
                result.records.push_back(std::move(rec));
            }
        }
        ++round;
        pending = expansion_candidates(result.records, cfg);
    }

    if (result.members.size() < std::max<std::size_t>(cfg.min_successes, 1)) {
        std::vector<std::string> diagnostics;
        for (const auto& r : result.records) diagnostics.push_back(format_record(r));
        throw AlgorithmFailure("step 1 produced " + std::to_string(result.members.size()) +
                                   " tuned hypotheses, fewer than required",
                               std::move(diagnostics));
    }
    return result;
}

FilterResult step2_filter(const std::vector<TunedHypothesis>& hypotheses,
                          const Dataset& target_train, double c) {
    if (hypotheses.empty()) throw InputError("step 2 needs a non-empty class");
    if (target_train.empty()) throw UndefinedError("step 2 needs target abnormal data");
    if (!(c >= 0.0)) throw ConfigError("c must be non-negative");
    std::vector<double> type2(hypotheses.size());
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        type2[i] = zero_one_type2(hypotheses[i].model, target_train);
    }
    const std::size_t best = argmin_by(hypotheses, [&](std::size_t i) { return type2[i]; });
    auto out = filter_by_slack(hypotheses, type2, type2[best],
                               c / std::sqrt(static_cast<double>(target_train.size())));
    out.reference = best;
    return out;
}

double sign_output_variance(const Model& model, const Dataset& data) {
    if (data.empty()) throw UndefinedError("variance over empty data");
    const Vector scores = forward_rows(model, data.X);
    const double n = static_cast<double>(scores.size());
    const double positives = static_cast<double>((scores.array() >= 0.0).count());
    const double mean = (2.0 * positives - n) / n;
    // Outputs are +-1, so E[y^2] = 1.
    return std::max(0.0, 1.0 - mean * mean);
}

FilterResult variance_filter(const std::vector<TunedHypothesis>& hypotheses,
                             const Model& reference, const Dataset& target_part) {
    if (hypotheses.empty()) throw InputError("variance filter needs a non-empty class");
    if (target_part.empty()) throw UndefinedError("variance filter needs target abnormal data");
    std::vector<double> type2(hypotheses.size());
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        type2[i] = zero_one_type2(hypotheses[i].model, target_part);
    }
    const double var = sign_output_variance(reference, target_part);
    auto out = filter_by_slack(hypotheses, type2, zero_one_type2(reference, target_part),
                               std::sqrt(var / static_cast<double>(target_part.size())));
    out.variance = var;
    return out;
}

TargetSplit split_target_for_variance(const Dataset& target_full, std::uint64_t seed) {
    if (target_full.size() < 4) {
        throw SplitError("variance filter needs at least 4 target abnormal points");
    }
    auto parts = split(target_full, {0.7, 0.3}, seed);
    return {std::move(parts[0]), std::move(parts[1])};
}

namespace {

struct VarianceStep {
    FilterResult filter;
    Model reference;
};

VarianceStep run_variance_step(const std::vector<TunedHypothesis>& hypotheses,
                               const Dataset& target_full, const Dataset& normal,
                               const Learner& learner, const TlnpConfig& cfg) {
    const TargetSplit parts = split_target_for_variance(target_full, cfg.split_seed);
    const TrainingSet held_out{normal, parts.evaluate,
                               Dataset{Matrix(0, static_cast<Eigen::Index>(target_full.dim())),
                                       Role::source_abnormal, SplitKind::train}};
    TlnpConfig only_target = cfg;
    only_target.lambda_s_grid = {0.0};
    only_target.min_successes = 1;
    only_target.target_success_count = 1;
    const Fitter fit = make_fitter(learner, held_out);
    Step1Result rerun;
    try {
        rerun = step1_grid(fit, held_out, only_target);
    } catch (const AlgorithmFailure& e) {
        throw AlgorithmFailure(std::string("variance filter rerun failed: ") + e.what(),
                               e.diagnostics());
    }
    Model reference = rerun.members.front().model;
    return {variance_filter(hypotheses, reference, parts.fit), std::move(reference)};
}

TlnpResult finish(Step1Result step1, FilterResult step2, const TrainingSet& data) {
    std::vector<TunedHypothesis> filtered;
    for (std::size_t i : step2.kept) filtered.push_back(step1.members[i]);
    TlnpResult result{step3_select(filtered, data.source), std::move(step1), std::move(step2),
                      std::nullopt};
    return result;
}

}  // namespace

FilterResult step2_variance_filter(const std::vector<TunedHypothesis>& hypotheses,
                                   const Dataset& target_full, const Dataset& normal,
                                   const Learner& learner, const TlnpConfig& cfg) {
    return run_variance_step(hypotheses, target_full, normal, learner, cfg).filter;
}

TunedHypothesis step3_select(const std::vector<TunedHypothesis>& filtered,
                             const Dataset& source_train) {
    if (filtered.empty()) throw InputError("step 3 needs a non-empty class");
    if (source_train.empty()) {
        return filtered[argmin_by(
            filtered, [&](std::size_t i) { return filtered[i].train_target_type2; })];
    }
    std::vector<double> type2(filtered.size());
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        type2[i] = zero_one_type2(filtered[i].model, source_train);
    }
    return filtered[argmin_by(filtered, [&](std::size_t i) { return type2[i]; })];
}

TlnpResult run_tlnp(const Fitter& fit, const TrainingSet& data, const TlnpConfig& cfg) {
    Step1Result step1 = step1_grid(fit, data, cfg);
    FilterResult step2 = step2_filter(step1.members, data.target, cfg.c_universal);
    return finish(std::move(step1), std::move(step2), data);
}

TlnpResult run_tlnp(const Learner& learner, const TrainingSet& data, const TlnpConfig& cfg) {
    cfg.validate();
    if (cfg.filter_mode == FilterMode::constant_c) {
        return run_tlnp(make_fitter(learner, data), data, cfg);
    }
    const TargetSplit parts = split_target_for_variance(data.target, cfg.split_seed);
    const TrainingSet reduced{data.normal, parts.fit, data.source};
    Step1Result step1 = step1_grid(make_fitter(learner, reduced), reduced, cfg);
    VarianceStep step2 = run_variance_step(step1.members, data.target, data.normal, learner, cfg);
    TlnpResult result = finish(std::move(step1), std::move(step2.filter), reduced);
    result.reference_model = std::move(step2.reference);
    return result;
}

void to_json(nlohmann::json& j, const TunedHypothesis& h) {
    j = nlohmann::json{{"model", h.model},
                       {"lambda_s", h.lambda_s},
                       {"lambda_0", h.lambda_0},
                       {"train_type1", h.train_type1},
                       {"train_target_type2", h.train_target_type2},
                       {"grid_index", h.grid_index}};
    j["train_source_type2"] = h.train_source_type2 ? nlohmann::json(*h.train_source_type2)
                                                   : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, TunedHypothesis& h) {
    j.at("model").get_to(h.model);
    h.lambda_s = j.at("lambda_s").get<double>();
    h.lambda_0 = j.at("lambda_0").get<double>();
    h.train_type1 = j.at("train_type1").get<double>();
    h.train_target_type2 = j.at("train_target_type2").get<double>();
    h.grid_index = j.value("grid_index", std::size_t{0});
    if (j.contains("train_source_type2") && !j.at("train_source_type2").is_null()) {
        h.train_source_type2 = j.at("train_source_type2").get<double>();
    } else {
        h.train_source_type2.reset();
    }
}

void to_json(nlohmann::json& j, const TlnpConfig& cfg) {
    j = nlohmann::json{{"alpha", cfg.alpha},
                       {"epsilon0", cfg.epsilon0},
                       {"lambda_s_grid", cfg.lambda_s_grid},
                       {"c_universal", cfg.c_universal},
                       {"max_tune_attempts", cfg.max_tune_attempts},
                       {"lambda0_bounds", {cfg.lambda0_min, cfg.lambda0_max}},
                       {"lambda_s_bounds", {cfg.lambda_s_min, cfg.lambda_s_max}},
                       {"min_successes", cfg.min_successes},
                       {"target_success_count", cfg.target_success_count},
                       {"filter_mode", to_string(cfg.filter_mode)},
                       {"initial_lambda0", cfg.initial_lambda0},
                       {"initial_increment", cfg.initial_increment},
                       {"split_seed", cfg.split_seed}};
}

void from_json(const nlohmann::json& j, TlnpConfig& cfg) {
    TlnpConfig d;
    cfg.alpha = j.value("alpha", d.alpha);
    cfg.epsilon0 = j.value("epsilon0", d.epsilon0);
    cfg.lambda_s_grid = j.value("lambda_s_grid", d.lambda_s_grid);
    cfg.c_universal = j.value("c_universal", d.c_universal);
    cfg.max_tune_attempts = j.value("max_tune_attempts", d.max_tune_attempts);
    if (j.contains("lambda0_bounds")) {
        cfg.lambda0_min = j.at("lambda0_bounds").at(0).get<double>();
        cfg.lambda0_max = j.at("lambda0_bounds").at(1).get<double>();
    }
    if (j.contains("lambda_s_bounds")) {
        cfg.lambda_s_min = j.at("lambda_s_bounds").at(0).get<double>();
        cfg.lambda_s_max = j.at("lambda_s_bounds").at(1).get<double>();
    }
    cfg.min_successes = j.value("min_successes", d.min_successes);
    cfg.target_success_count = j.value("target_success_count", d.target_success_count);
    cfg.filter_mode = parse_filter_mode(j.value("filter_mode", std::string(to_string(d.filter_mode))));
    cfg.initial_lambda0 = j.value("initial_lambda0", d.initial_lambda0);
    cfg.initial_increment = j.value("initial_increment", d.initial_increment);
    cfg.split_seed = j.value("split_seed", d.split_seed);
    cfg.workers = j.value("workers", d.workers);
}

nlohmann::json audit_json(const TlnpResult& result) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& r : result.step1.records) {
        nlohmann::json trajectory = nlohmann::json::array();
        for (const auto& a : r.trajectory) {
            trajectory.push_back({{"lambda_0", a.lambda_0}, {"type1", a.type1}});
        }
        grid.push_back({{"lambda_s", r.lambda_s},
                        {"grid_index", r.grid_index},
                        {"round", r.round},
                        {"attempts", r.trajectory.size()},
                        {"lambda_0_trajectory", trajectory},
                        {"final_type1", r.trajectory.empty() ? nlohmann::json(nullptr)
                                                             : nlohmann::json(r.trajectory.back().type1)},
                        {"accepted", r.accepted},
                        {"failure", r.failure}});
    }
    nlohmann::json members = nlohmann::json::array();
    for (const auto& h : result.step1.members) {
        members.push_back({{"grid_index", h.grid_index},
                           {"lambda_s", h.lambda_s},
                           {"lambda_0", h.lambda_0},
                           {"train_type1", h.train_type1},
                           {"train_target_type2", h.train_target_type2}});
    }
    nlohmann::json kept = nlohmann::json::array();
    for (std::size_t i : result.step2.kept) kept.push_back(result.step1.members[i].grid_index);
    nlohmann::json filter{{"reference_type2", result.step2.reference_type2},
                          {"slack", result.step2.slack},
                          {"threshold", result.step2.threshold},
                          {"kept_grid_indices", kept}};
    if (result.step2.variance) filter["variance"] = *result.step2.variance;
    return {{"grid", grid},
            {"reduced_class", members},
            {"filter", filter},
            {"selected", {{"grid_index", result.selected.grid_index},
                          {"lambda_s", result.selected.lambda_s},
                          {"lambda_0", result.selected.lambda_0}}}};
}

}  // namespace tlnp
