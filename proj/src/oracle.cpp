#include "tlnp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "tlnp/error.hpp"
#include "tlnp/risk.hpp"

namespace tlnp {
namespace {

double population_risk(const SurrogateLossSpec& spec, const Model& model, const DiscreteLaw& law,
                       double sign) {
    const Vector scores = forward_rows(model, law.points);
    std::vector<double> terms(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        terms[static_cast<std::size_t>(i)] =
            law.weights[static_cast<std::size_t>(i)] * eval_loss(spec, sign * scores[i]);
    }
    return order_invariant_mean(terms) * static_cast<double>(terms.size());
}

}  // namespace

void FiniteClass::validate() const {
    if (hypotheses.empty()) throw ConfigError("finite class must contain at least one hypothesis");
    const std::size_t d = hypotheses.front().input_dim();
    for (const auto& h : hypotheses) {
        h.validate();
        if (h.input_dim() != d) throw ConfigError("class members must share the input dimension");
    }
    if (!(c_tilde >= 0.0)) throw ConfigError("c_tilde must be non-negative");
}

ClassRisks compute_class_risks(const FiniteClass& cls, const TrainingSet& data,
                               const SurrogateLossSpec& spec) {
    cls.validate();
    ClassRisks risks;
    for (const auto& h : cls.hypotheses) {
        risks.type1.push_back(surrogate_type1(spec, h, data.normal));
        risks.target.push_back(surrogate_type2(spec, h, data.target));
        if (!data.source.empty()) risks.source.push_back(surrogate_type2(spec, h, data.source));
    }
    return risks;
}

OracleChoice solve_target_hat(const ClassRisks& risks, double alpha, double epsilon0) {
    const double limit = alpha + epsilon0 / 2.0;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < risks.type1.size(); ++i) {
        if (risks.type1[i] > limit) continue;
        if (!best || risks.target[i] < risks.target[*best]) best = i;
    }
    if (!best) {
        const double lowest = risks.type1.empty()
                                  ? std::numeric_limits<double>::infinity()
                                  : *std::min_element(risks.type1.begin(), risks.type1.end());
        throw FeasibilityError("no hypothesis has surrogate Type-I <= " + std::to_string(limit) +
                                   " (minimum " + std::to_string(lowest) + ")",
                               lowest);
    }
    OracleChoice out{*best, risks.type1[*best], risks.target[*best], std::nullopt};
    if (!risks.source.empty()) out.source = risks.source[*best];
    return out;
}

OracleChoice solve_procedure8(const ClassRisks& risks, double alpha, double epsilon0,
                              double c_tilde, std::size_t n_target) {
    if (risks.source.empty()) throw UndefinedError("procedure needs source risks");
    if (n_target == 0) throw UndefinedError("procedure needs target samples");
    const OracleChoice anchor = solve_target_hat(risks, alpha, epsilon0);
    const double type1_limit = alpha + epsilon0 / 2.0;
    const double target_limit =
        anchor.target + 2.0 * c_tilde / std::sqrt(static_cast<double>(n_target));

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < risks.source.size(); ++i) {
        if (risks.type1[i] > type1_limit || risks.target[i] > target_limit) continue;
        if (!best || risks.source[i] < risks.source[*best]) best = i;
    }
    // h_T satisfies both constraints, so the feasible set is never empty.
    if (!best) throw Error("procedure feasible set is empty; h_T should always qualify");
    return {*best, risks.type1[*best], risks.target[*best], risks.source[*best]};
}

OracleChoice solve_target_hat(const FiniteClass& cls, const TrainingSet& data,
                              const SurrogateLossSpec& spec, double alpha, double epsilon0) {
    return solve_target_hat(compute_class_risks(cls, data, spec), alpha, epsilon0);
}

OracleChoice solve_procedure8(const FiniteClass& cls, const TrainingSet& data,
                              const SurrogateLossSpec& spec, double alpha, double epsilon0) {
    return solve_procedure8(compute_class_risks(cls, data, spec), alpha, epsilon0, cls.c_tilde,
                            data.target.size());
}

void DiscreteLaw::validate() const {
    if (points.rows() == 0) throw ConfigError("discrete law needs at least one point");
    if (static_cast<std::size_t>(points.rows()) != weights.size()) {
        throw ConfigError("discrete law needs one weight per point");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ConfigError("discrete law weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("discrete law weights must sum to 1");
}

TransferExponentEstimate estimate_transfer_exponent(const FiniteClass& cls,
                                                    const DiscreteLaw& normal_law,
                                                    const DiscreteLaw& source_law,
                                                    const DiscreteLaw& target_law,
                                                    const SurrogateLossSpec& spec, double alpha,
                                                    double r, std::vector<double> grid) {
    cls.validate();
    normal_law.validate();
    source_law.validate();
    target_law.validate();
    if (grid.empty()) throw ConfigError("exponent grid must not be empty");
    if (!(r >= 0.0)) throw ConfigError("r must be non-negative");
    std::sort(grid.begin(), grid.end());

    const std::size_t m = cls.size();
    std::vector<double> r0(m), rs(m), rt(m);
    for (std::size_t i = 0; i < m; ++i) {
        r0[i] = population_risk(spec, cls.hypotheses[i], normal_law, 1.0);
        rs[i] = population_risk(spec, cls.hypotheses[i], source_law, -1.0);
        rt[i] = population_risk(spec, cls.hypotheses[i], target_law, -1.0);
    }

    std::optional<double> best_source;
    for (std::size_t i = 0; i < m; ++i) {
        if (r0[i] <= alpha && (!best_source || rs[i] < *best_source)) best_source = rs[i];
    }
    if (!best_source) {
        throw FeasibilityError("no hypothesis satisfies the population Type-I constraint",
                               *std::min_element(r0.begin(), r0.end()));
    }
    // h*_S: among source solutions, the one with the largest target risk.
    std::optional<std::size_t> reference;
    for (std::size_t i = 0; i < m; ++i) {
        if (r0[i] <= alpha && rs[i] == *best_source && (!reference || rt[i] > rt[*reference])) {
            reference = i;
        }
    }

    std::vector<std::pair<double, double>> excess;  // (source, target)
    for (std::size_t i = 0; i < m; ++i) {
        if (r0[i] > alpha + r) continue;
        const double s = std::max(0.0, rs[i] - rs[*reference]);
        const double t = std::max(0.0, rt[i] - rt[*reference]);
        if (t > 0.0) excess.emplace_back(s, t);
    }
    TransferExponentEstimate out;
    out.reference_index = *reference;
    if (excess.empty()) {
        out.degenerate = true;
        return out;
    }

    auto constant_for = [&](double rho) {
        double c = 0.0;
        for (const auto& [s, t] : excess) {
            if (s == 0.0) return std::numeric_limits<double>::infinity();
            c = std::max(c, std::pow(t, rho) / s);
        }
        return c;
    };
    std::optional<std::pair<double, double>> fallback;
    for (double rho : grid) {
        const double c = constant_for(rho);
        // Excess risks are differences of computed risks; allow rounding noise.
        if (c <= 1.0 + 1e-9) {
            out.rho = rho;
            out.c = c;
            return out;
        }
        if (!fallback || c < fallback->second) fallback = {rho, c};
    }
    out.rho = fallback->first;
    out.c = fallback->second;
    return out;
}

void to_json(nlohmann::json& j, const DiscreteLaw& law) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < law.points.rows(); ++r) {
        rows.emplace_back(law.points.row(r).data(), law.points.row(r).data() + law.points.cols());
    }
    j = nlohmann::json{{"points", rows}, {"weights", law.weights}};
}

void from_json(const nlohmann::json& j, DiscreteLaw& law) {
    const auto rows = j.at("points").get<std::vector<std::vector<double>>>();
    law.weights = j.at("weights").get<std::vector<double>>();
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    law.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != d) throw InputError("ragged law points");
        for (std::size_t c = 0; c < d; ++c) {
            law.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    law.validate();
}

}  // namespace tlnp
