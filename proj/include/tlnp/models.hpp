#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "tlnp/types.hpp"

namespace tlnp {

enum class ModelKind { linear, quadratic, mlp2 };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);

struct Architecture {
    std::size_t input_dim = 1;
    // Only used by mlp2.
    std::size_t hidden_units = 0;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Number of parameters for a kind/architecture pair. Throws ConfigError on an
// invalid architecture.
std::size_t parameter_count(ModelKind kind, const Architecture& arch);

// A scoring function h: R^d -> R. Parameters are one flat vector laid out as
//   linear:    [b (d), c]
//   quadratic: [A row-major (d*d), b (d), c]
//   mlp2:      [W1 row-major (H*d), b1 (H), w2 (H), b2]
// so the output bias is always the last entry.
struct Model {
    ModelKind kind = ModelKind::linear;
    Architecture arch;
    Vector params;
    std::uint64_t seed = 0;

    std::size_t input_dim() const { return arch.input_dim; }
    double& bias() { return params[params.size() - 1]; }
    double bias() const { return params[params.size() - 1]; }

    // Throws ConfigError if params length does not match kind/arch.
    void validate() const;
};

// Same length as the parameter vector.
using GradientBuffer = Vector;

Model init_model(ModelKind kind, const Architecture& arch, std::uint64_t seed);

// Wraps explicit parameters, checking the length.
Model make_model(ModelKind kind, const Architecture& arch, Vector params);

double forward(const Model& model, Eigen::Ref<const Vector> x);

// Gradient of upstream * h(x) with respect to params.
GradientBuffer backward(const Model& model, Eigen::Ref<const Vector> x, double upstream);

// Adds upstream * dh(x)/dparams into grad.
void accumulate_backward(const Model& model, Eigen::Ref<const Vector> x, double upstream,
                         GradientBuffer& grad);

// +1 (abnormal) iff h(x) >= 0.
int predict_sign(const Model& model, Eigen::Ref<const Vector> x);

// Scores for every row of X.
Vector forward_rows(const Model& model, const Matrix& X);

// linear and quadratic kinds are linear in their parameters: h(x) = params . phi(x).
bool is_linear_in_params(ModelKind kind);

// Rows of the returned matrix are phi(x) for each row x of X. Only valid for
// kinds where is_linear_in_params holds.
Matrix feature_map(ModelKind kind, const Matrix& X);

void to_json(nlohmann::json& j, const Model& model);
void from_json(const nlohmann::json& j, Model& model);

}  // namespace tlnp
