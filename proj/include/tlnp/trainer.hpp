#pragma once

#include <cstddef>
#include <cstdint>

#include "tlnp/dataset.hpp"
#include "tlnp/losses.hpp"
#include "tlnp/models.hpp"

namespace tlnp {

enum class BatchMode {
    // Full batch up to full_batch_limit rows in total, otherwise batch_size.
    automatic,
    full,
    fixed,
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 300;
    BatchMode batch_mode = BatchMode::automatic;
    std::size_t batch_size = 512;
    std::size_t full_batch_limit = 4096;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    // Abort when the (mini)batch cost exceeds this or turns non-finite.
    double divergence_limit = 1e12;

    void validate() const;
    // Minibatches per epoch for a problem with total_rows rows, of which the
    // smallest participating dataset has smallest_rows.
    std::size_t batches_per_epoch(std::size_t total_rows, std::size_t smallest_rows) const;
};

// R_phi,T(h) + lambda_s * R_phi,S(h) + lambda_0 * R_phi,0(h). The source term
// is dropped when lambda_s == 0. Throws ConfigError for negative weights or
// lambda_s > 0 with an empty source, UndefinedError for empty normal/target.
double lagrangian_cost(const SurrogateLossSpec& spec, const Model& model, const Dataset& normal,
                       const Dataset& target, const Dataset& source, double lambda_s,
                       double lambda_0);

// Analytic gradient of lagrangian_cost with respect to model.params.
GradientBuffer lagrangian_gradient(const SurrogateLossSpec& spec, const Model& model,
                                   const Dataset& normal, const Dataset& target,
                                   const Dataset& source, double lambda_s, double lambda_0);

// Adam on the Lagrangian cost starting from init_model(kind, arch, cfg.seed).
// Deterministic in cfg.seed. Throws TrainingDiverged with the step index.
Model train(ModelKind kind, const Architecture& arch, const SurrogateLossSpec& spec,
            const TrainingSet& data, double lambda_s, double lambda_0, const TrainConfig& cfg);

}  // namespace tlnp
