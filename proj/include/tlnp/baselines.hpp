#pragma once

#include "tlnp/tlnp.hpp"

namespace tlnp {

// TLNP restricted to lambda_s = 0 with the source ignored; the single tuned
// hypothesis is the output.
TunedHypothesis only_target_np(const Learner& learner, const TrainingSet& data,
                               const TlnpConfig& cfg);

// only_target_np with the source abnormal data in the target role.
TunedHypothesis only_source_np(const Learner& learner, const TrainingSet& data,
                               const TlnpConfig& cfg);

// only_target_np on source and target abnormal data pooled together.
TunedHypothesis pooled_np(const Learner& learner, const TrainingSet& data, const TlnpConfig& cfg);

// Balanced surrogate classifier (lambda_0 = 1, no tuning) whose bias is then
// shifted so the training Type-I is at most alpha.
TunedHypothesis threshold_classifier(const Learner& learner, const TrainingSet& data,
                                     const TlnpConfig& cfg, bool pool_source);

// Smallest shift t with #{score >= t} <= floor(alpha * n), placed halfway
// between consecutive order statistics.
double threshold_shift(std::vector<double> normal_scores, double alpha);

// Better of only_source_np and only_target_np on the training target Type-II;
// ties go to the target solution.
TunedHypothesis tlod(const Learner& learner, const TrainingSet& data, const TlnpConfig& cfg);

}  // namespace tlnp
