#include "tlnp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "tlnp/error.hpp"
#include "tlnp/risk.hpp"

namespace tlnp {
namespace {

void check_weights(const Dataset& normal, const Dataset& target, const Dataset& source,
                   double lambda_s, double lambda_0) {
    if (!(lambda_s >= 0.0) || !(lambda_0 >= 0.0) || !std::isfinite(lambda_s) ||
        !std::isfinite(lambda_0)) {
        throw ConfigError("Lagrangian weights must be finite and non-negative");
    }
    if (lambda_s > 0.0 && source.empty()) {
        throw ConfigError("lambda_s > 0 requires source abnormal data");
    }
    if (target.empty() || normal.empty()) {
        throw UndefinedError("Lagrangian cost needs non-empty normal and target data");
    }
}

// One risk term of the cost: weight * mean phi(sign * h(x)) over the rows.
struct Term {
    const Matrix* rows;  // raw inputs, or features for linear-in-params kinds
    double sign;
    double weight;
};

class CostEvaluator {
public:
    CostEvaluator(const SurrogateLossSpec& spec, const Model& model, const Dataset& normal,
                  const Dataset& target, const Dataset& source, double lambda_s, double lambda_0)
        : spec_(spec), linear_(is_linear_in_params(model.kind)) {
        const Dataset* parts[] = {&target, &source, &normal};
        const double signs[] = {-1.0, -1.0, 1.0};
        const double weights[] = {1.0, lambda_s, lambda_0};
        for (int t = 0; t < 3; ++t) {
            if (t == 1 && lambda_s == 0.0) continue;
            if (parts[t]->empty()) continue;
            if (parts[t]->dim() != model.arch.input_dim) {
                throw InputError("dataset dimension does not match the model");
            }
            storage_.push_back(linear_ ? feature_map(model.kind, parts[t]->X) : parts[t]->X);
            signs_.push_back(signs[t]);
            weights_.push_back(weights[t]);
        }
        for (std::size_t t = 0; t < storage_.size(); ++t) {
            terms_.push_back({&storage_[t], signs_[t], weights_[t]});
        }
    }

    const std::vector<Term>& terms() const { return terms_; }

    // Cost and gradient restricted to the given rows of each term (all rows
    // when indices is empty). Returns the cost; grad is overwritten.
    double evaluate(const Model& model, const std::vector<std::vector<Eigen::Index>>* indices,
                    GradientBuffer* grad) const {
        if (grad != nullptr) grad->setZero(model.params.size());
        double cost = 0.0;
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const Term& term = terms_[t];
            const Eigen::Index n = indices ? static_cast<Eigen::Index>((*indices)[t].size())
                                           : term.rows->rows();
            if (n == 0) continue;
            const double scale = term.weight / static_cast<double>(n);
            double sum = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                const Eigen::Index r = indices ? (*indices)[t][static_cast<std::size_t>(k)] : k;
                const auto x = term.rows->row(r).transpose();
                const double score = linear_ ? x.dot(model.params) : forward(model, x);
                const double margin = term.sign * score;
                sum += eval_loss(spec_, margin);
                if (grad != nullptr) {
                    const double upstream = scale * term.sign * eval_loss_deriv(spec_, margin);
                    if (upstream == 0.0) continue;
                    if (linear_) {
                        grad->noalias() += upstream * x;
                    } else {
                        accumulate_backward(model, x, upstream, *grad);
                    }
                }
            }
            cost += scale * sum;
        }
        return cost;
    }

private:
    const SurrogateLossSpec& spec_;
    bool linear_;
    std::vector<Matrix> storage_;
    std::vector<double> signs_;
    std::vector<double> weights_;
    std::vector<Term> terms_;
};

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in (0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    if (batch_mode == BatchMode::fixed && batch_size < 1) {
        throw ConfigError("batch_size must be at least 1");
    }
}

std::size_t TrainConfig::batches_per_epoch(std::size_t total_rows,
                                           std::size_t smallest_rows) const {
    if (batch_mode == BatchMode::full) return 1;
    if (batch_mode == BatchMode::automatic && total_rows <= full_batch_limit) return 1;
    const std::size_t size = std::max<std::size_t>(batch_size, 1);
    const std::size_t batches = (total_rows + size - 1) / size;
    // Every term must see at least one row per step.
    return std::clamp<std::size_t>(batches, 1, std::max<std::size_t>(smallest_rows, 1));
}

double lagrangian_cost(const SurrogateLossSpec& spec, const Model& model, const Dataset& normal,
                       const Dataset& target, const Dataset& source, double lambda_s,
                       double lambda_0) {
    check_weights(normal, target, source, lambda_s, lambda_0);
    double cost = surrogate_type2(spec, model, target) + lambda_0 * surrogate_type1(spec, model, normal);
    if (lambda_s > 0.0) {
        cost += lambda_s * surrogate_type2(spec, model, source);
    }
    return cost;
}

GradientBuffer lagrangian_gradient(const SurrogateLossSpec& spec, const Model& model,
                                   const Dataset& normal, const Dataset& target,
                                   const Dataset& source, double lambda_s, double lambda_0) {
    check_weights(normal, target, source, lambda_s, lambda_0);
    const CostEvaluator evaluator(spec, model, normal, target, source, lambda_s, lambda_0);
    GradientBuffer grad;
    evaluator.evaluate(model, nullptr, &grad);
    return grad;
}

Model train(ModelKind kind, const Architecture& arch, const SurrogateLossSpec& spec,
            const TrainingSet& data, double lambda_s, double lambda_0, const TrainConfig& cfg) {
    cfg.validate();
    spec.validate();
    check_weights(data.normal, data.target, data.source, lambda_s, lambda_0);

    Model model = init_model(kind, arch, cfg.seed);
    const CostEvaluator evaluator(spec, model, data.normal, data.target, data.source, lambda_s,
                                  lambda_0);
    const auto& terms = evaluator.terms();

    std::size_t total = 0;
    std::size_t smallest = std::numeric_limits<std::size_t>::max();
    for (const Term& term : terms) {
        const auto n = static_cast<std::size_t>(term.rows->rows());
        total += n;
        smallest = std::min(smallest, n);
    }
    const std::size_t batches = cfg.batches_per_epoch(total, smallest);

    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::vector<Eigen::Index>> order(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        order[t].resize(static_cast<std::size_t>(terms[t].rows->rows()));
        std::iota(order[t].begin(), order[t].end(), Eigen::Index{0});
    }
    std::vector<std::vector<Eigen::Index>> chunk(terms.size());

    const auto p = model.params.size();
    Vector m = Vector::Zero(p);
    Vector v = Vector::Zero(p);
    GradientBuffer grad(p);
    double beta1_power = 1.0;
    double beta2_power = 1.0;
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batches > 1) {
            for (auto& o : order) std::shuffle(o.begin(), o.end(), shuffle_rng);
        }
        for (std::size_t b = 0; b < batches; ++b) {
            const std::vector<std::vector<Eigen::Index>>* indices = nullptr;
            if (batches > 1) {
                for (std::size_t t = 0; t < terms.size(); ++t) {
                    const std::size_t n = order[t].size();
                    const std::size_t lo = b * n / batches;
                    const std::size_t hi = (b + 1) * n / batches;
                    chunk[t].assign(order[t].begin() + static_cast<std::ptrdiff_t>(lo),
                                    order[t].begin() + static_cast<std::ptrdiff_t>(hi));
                }
                indices = &chunk;
            }
            const double cost = evaluator.evaluate(model, indices, &grad);
            if (!std::isfinite(cost) || cost > cfg.divergence_limit || !grad.allFinite()) {
                throw TrainingDiverged(step, cost);
            }

            beta1_power *= cfg.adam_beta1;
            beta2_power *= cfg.adam_beta2;
            m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
            v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseAbs2();
            const double step_size = cfg.learning_rate / (1.0 - beta1_power);
            const double v_correction = 1.0 / (1.0 - beta2_power);
            model.params.array() -=
                step_size * m.array() / ((v.array() * v_correction).sqrt() + cfg.adam_eps);
            ++step;
        }
    }
    if (!model.params.allFinite()) {
        throw TrainingDiverged(step, std::numeric_limits<double>::quiet_NaN());
    }
    return model;
}

}  // namespace tlnp
