#include "tlnp/models.hpp"

#include <cmath>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "tlnp/error.hpp"

namespace tlnp {
namespace {

constexpr double kSmallInitScale = 0.01;

void check_input(const Model& model, Eigen::Ref<const Vector> x) {
    if (static_cast<std::size_t>(x.size()) != model.arch.input_dim) {
        throw InputError("input has length " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(model.arch.input_dim));
    }
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
    if (name == "linear") return ModelKind::linear;
    if (name == "quadratic") return ModelKind::quadratic;
    if (name == "mlp2") return ModelKind::mlp2;
    throw ConfigError("unknown model kind: " + std::string(name));
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::linear:
            return "linear";
        case ModelKind::quadratic:
            return "quadratic";
        case ModelKind::mlp2:
            return "mlp2";
    }
    return "unknown";
}

std::size_t parameter_count(ModelKind kind, const Architecture& arch) {
    const std::size_t d = arch.input_dim;
    if (d < 1) {
        throw ConfigError("input dimension must be at least 1");
    }
    switch (kind) {
        case ModelKind::linear:
            return d + 1;
        case ModelKind::quadratic:
            return d * d + d + 1;
        case ModelKind::mlp2:
            if (arch.hidden_units < 1) {
                throw ConfigError("mlp2 needs at least one hidden unit");
            }
            return arch.hidden_units * d + 2 * arch.hidden_units + 1;
    }
    throw ConfigError("unknown model kind");
}

void Model::validate() const {
    const std::size_t expected = parameter_count(kind, arch);
    if (static_cast<std::size_t>(params.size()) != expected) {
        throw ConfigError("model has " + std::to_string(params.size()) +
                          " parameters, expected " + std::to_string(expected));
    }
}

Model init_model(ModelKind kind, const Architecture& arch, std::uint64_t seed) {
    Model model{kind, arch, Vector::Zero(static_cast<Eigen::Index>(parameter_count(kind, arch))),
                seed};
    std::mt19937_64 rng(seed);
    const auto d = static_cast<Eigen::Index>(arch.input_dim);

    if (kind == ModelKind::mlp2) {
        const auto h = static_cast<Eigen::Index>(arch.hidden_units);
        // Fan-in scaled uniform for both layers; biases stay at zero.
        std::uniform_real_distribution<double> first(-1.0 / std::sqrt(static_cast<double>(d)),
                                                     1.0 / std::sqrt(static_cast<double>(d)));
        std::uniform_real_distribution<double> second(-1.0 / std::sqrt(static_cast<double>(h)),
                                                      1.0 / std::sqrt(static_cast<double>(h)));
        for (Eigen::Index i = 0; i < h * d; ++i) model.params[i] = first(rng);
        for (Eigen::Index i = 0; i < h; ++i) model.params[h * d + h + i] = second(rng);
        return model;
    }

    std::uniform_real_distribution<double> small(-kSmallInitScale, kSmallInitScale);
    const Eigen::Index weights = model.params.size() - 1;
    for (Eigen::Index i = 0; i < weights; ++i) model.params[i] = small(rng);
    return model;
}

Model make_model(ModelKind kind, const Architecture& arch, Vector params) {
    Model model{kind, arch, std::move(params), 0};
    model.validate();
    return model;
}

double forward(const Model& model, Eigen::Ref<const Vector> x) {
    check_input(model, x);
    const auto d = static_cast<Eigen::Index>(model.arch.input_dim);
    const Vector& p = model.params;

    switch (model.kind) {
        case ModelKind::linear:
            return p.head(d).dot(x) + p[d];
        case ModelKind::quadratic: {
            const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>
                a(p.data(), d, d);
            return x.dot(a * x) + p.segment(d * d, d).dot(x) + p[d * d + d];
        }
        case ModelKind::mlp2: {
            const auto h = static_cast<Eigen::Index>(model.arch.hidden_units);
            const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>
                w1(p.data(), h, d);
            const Vector hidden = (w1 * x + p.segment(h * d, h)).cwiseMax(0.0);
            return p.segment(h * d + h, h).dot(hidden) + p[h * d + 2 * h];
        }
    }
    return 0.0;
}

void accumulate_backward(const Model& model, Eigen::Ref<const Vector> x, double upstream,
                         GradientBuffer& grad) {
    check_input(model, x);
    if (grad.size() != model.params.size()) {
        throw InputError("gradient buffer length does not match parameters");
    }
    const auto d = static_cast<Eigen::Index>(model.arch.input_dim);
    const Vector& p = model.params;

    switch (model.kind) {
        case ModelKind::linear:
            grad.head(d) += upstream * x;
            grad[d] += upstream;
            return;
        case ModelKind::quadratic: {
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ga(
                grad.data(), d, d);
            ga.noalias() += upstream * x * x.transpose();
            grad.segment(d * d, d) += upstream * x;
            grad[d * d + d] += upstream;
            return;
        }
        case ModelKind::mlp2: {
            const auto h = static_cast<Eigen::Index>(model.arch.hidden_units);
            const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>
                w1(p.data(), h, d);
            const Vector pre = w1 * x + p.segment(h * d, h);
            const auto w2 = p.segment(h * d + h, h);
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw1(
                grad.data(), h, d);
            for (Eigen::Index k = 0; k < h; ++k) {
                const double active = pre[k] > 0.0 ? pre[k] : 0.0;
                grad[h * d + h + k] += upstream * active;
                if (pre[k] > 0.0) {
                    const double delta = upstream * w2[k];
                    gw1.row(k) += delta * x.transpose();
                    grad[h * d + k] += delta;
                }
            }
            grad[h * d + 2 * h] += upstream;
            return;
        }
    }
}

GradientBuffer backward(const Model& model, Eigen::Ref<const Vector> x, double upstream) {
    GradientBuffer grad = GradientBuffer::Zero(model.params.size());
    accumulate_backward(model, x, upstream, grad);
    return grad;
}

int predict_sign(const Model& model, Eigen::Ref<const Vector> x) {
    return forward(model, x) >= 0.0 ? 1 : -1;
}

bool is_linear_in_params(ModelKind kind) { return kind != ModelKind::mlp2; }

Matrix feature_map(ModelKind kind, const Matrix& X) {
    if (!is_linear_in_params(kind)) {
        throw InputError("feature_map requires a kind that is linear in its parameters");
    }
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (kind == ModelKind::linear) {
        Matrix phi(n, d + 1);
        phi.leftCols(d) = X;
        phi.col(d).setOnes();
        return phi;
    }
    Matrix phi(n, d * d + d + 1);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index i = 0; i < d; ++i) {
            phi.block(r, i * d, 1, d) = X(r, i) * X.row(r);
        }
    }
    phi.middleCols(d * d, d) = X;
    phi.col(d * d + d).setOnes();
    return phi;
}

Vector forward_rows(const Model& model, const Matrix& X) {
    if (X.rows() > 0 && static_cast<std::size_t>(X.cols()) != model.arch.input_dim) {
        throw InputError("data has " + std::to_string(X.cols()) + " columns, model expects " +
                         std::to_string(model.arch.input_dim));
    }
    Vector scores(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        scores[r] = forward(model, X.row(r).transpose());
    }
    return scores;
}

void to_json(nlohmann::json& j, const Model& model) {
    j = nlohmann::json{{"kind", to_string(model.kind)},
                       {"input_dim", model.arch.input_dim},
                       {"hidden_units", model.arch.hidden_units},
                       {"seed", model.seed},
                       {"params", std::vector<double>(model.params.data(),
                                                      model.params.data() + model.params.size())}};
}

void from_json(const nlohmann::json& j, Model& model) {
    model.kind = parse_model_kind(j.at("kind").get<std::string>());
    model.arch.input_dim = j.at("input_dim").get<std::size_t>();
    model.arch.hidden_units = j.value("hidden_units", std::size_t{0});
    model.seed = j.value("seed", std::uint64_t{0});
    const auto values = j.at("params").get<std::vector<double>>();
    model.params = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    model.validate();
}

}  // namespace tlnp
