#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tlnp/dataset.hpp"
#include "tlnp/losses.hpp"
#include "tlnp/models.hpp"

namespace tlnp {

// A finite hypothesis class with fixed parameters. c_tilde is the slack
// constant of the second-stage target constraint, supplied by the user.
struct FiniteClass {
    std::vector<Model> hypotheses;
    double c_tilde = 0.0;

    std::size_t size() const { return hypotheses.size(); }
    void validate() const;
};

// Empirical surrogate risks of every class member.
struct ClassRisks {
    std::vector<double> type1;   // R_phi,mu0
    std::vector<double> target;  // R_phi,mu1T
    std::vector<double> source;  // R_phi,mu1S (empty when there is no source data)
};

ClassRisks compute_class_risks(const FiniteClass& cls, const TrainingSet& data,
                               const SurrogateLossSpec& spec);

struct OracleChoice {
    std::size_t index = 0;
    double type1 = 0.0;
    double target = 0.0;
    std::optional<double> source;
};

// argmin target risk subject to type1 <= alpha + eps0/2, lowest index on ties.
// Throws FeasibilityError when no member is feasible.
OracleChoice solve_target_hat(const ClassRisks& risks, double alpha, double epsilon0);

// argmin source risk subject to target <= target(h_T) + 2 c_tilde / sqrt(n_T)
// and type1 <= alpha + eps0/2, lowest index on ties.
OracleChoice solve_procedure8(const ClassRisks& risks, double alpha, double epsilon0,
                              double c_tilde, std::size_t n_target);

// Convenience overloads computing the risks first.
OracleChoice solve_target_hat(const FiniteClass& cls, const TrainingSet& data,
                              const SurrogateLossSpec& spec, double alpha, double epsilon0);
OracleChoice solve_procedure8(const FiniteClass& cls, const TrainingSet& data,
                              const SurrogateLossSpec& spec, double alpha, double epsilon0);

// Distribution supported on finitely many weighted points.
struct DiscreteLaw {
    Matrix points;
    std::vector<double> weights;

    void validate() const;
};

struct TransferExponentEstimate {
    double rho = 1.0;
    double c = 1.0;
    bool degenerate = false;
    // Index of h*_S: the source solution with the largest target risk.
    std::size_t reference_index = 0;
};

// Diagnostic fit of the transfer exponent over exact population risks. For
// each rho in the grid, c(rho) is the smallest constant making
// c * sourceExcess >= targetExcess^rho hold for every member with
// R_phi,mu0 <= alpha + r. Returns the smallest rho with c(rho) <= 1, or
// otherwise the rho with the smallest c. Degenerate (all target excess zero)
// gives (1, 1) with the flag set.
TransferExponentEstimate estimate_transfer_exponent(const FiniteClass& cls,
                                                    const DiscreteLaw& normal_law,
                                                    const DiscreteLaw& source_law,
                                                    const DiscreteLaw& target_law,
                                                    const SurrogateLossSpec& spec, double alpha,
                                                    double r, std::vector<double> grid);

void to_json(nlohmann::json& j, const DiscreteLaw& law);
void from_json(const nlohmann::json& j, DiscreteLaw& law);

}  // namespace tlnp
