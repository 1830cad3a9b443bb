#pragma once

#include <span>

#include "tlnp/dataset.hpp"
#include "tlnp/losses.hpp"
#include "tlnp/models.hpp"

namespace tlnp {

struct ErrorPair {
    double type1 = 0.0;
    double type2 = 0.0;
};

// Empirical 0-1 errors. Type-I counts normal rows with h(x) >= 0, Type-II
// counts abnormal rows with h(x) < 0. Empty data raises UndefinedError; a
// dataset with the wrong role raises InputError.
double zero_one_type1(const Model& model, const Dataset& normal);
double zero_one_type2(const Model& model, const Dataset& abnormal);

// Empirical surrogate errors: mean phi(h(x)) over normal rows and mean
// phi(-h(x)) over abnormal rows.
double surrogate_type1(const SurrogateLossSpec& spec, const Model& model, const Dataset& normal);
double surrogate_type2(const SurrogateLossSpec& spec, const Model& model,
                       const Dataset& abnormal);

// Same quantities from precomputed scores. These skip the role checks.
double zero_one_type1_scores(std::span<const double> scores);
double zero_one_type2_scores(std::span<const double> scores);
double surrogate_type1_scores(const SurrogateLossSpec& spec, std::span<const double> scores);
double surrogate_type2_scores(const SurrogateLossSpec& spec, std::span<const double> scores);

// Mean of the values, independent of their order: values are sorted before a
// pairwise summation.
double order_invariant_mean(std::span<const double> values);

}  // namespace tlnp
