#include "tlnp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tlnp/error.hpp"

namespace tlnp {
namespace {

// log(1 + e^x) without overflow for large x.
double softplus(double x) {
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void require_finite(double margin) {
    if (!std::isfinite(margin)) {
        throw InputError("loss margin must be finite");
    }
}

double raw_loss(LossFamily family, double x) {
    switch (family) {
        case LossFamily::exponential:
            return std::exp(x);
        case LossFamily::logistic:
            return softplus(x) / std::numbers::ln2;
        case LossFamily::hinge:
            return std::max(0.0, 1.0 + x);
    }
    return 0.0;
}

double raw_deriv(LossFamily family, double x) {
    switch (family) {
        case LossFamily::exponential:
            return std::exp(x);
        case LossFamily::logistic:
            return sigmoid(x) / std::numbers::ln2;
        case LossFamily::hinge:
            return x >= -1.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

}  // namespace

LossFamily parse_loss_family(std::string_view name) {
    if (name == "exponential") return LossFamily::exponential;
    if (name == "logistic") return LossFamily::logistic;
    if (name == "hinge") return LossFamily::hinge;
    throw ConfigError("unknown loss family: " + std::string(name));
}

std::string_view to_string(LossFamily family) {
    switch (family) {
        case LossFamily::exponential:
            return "exponential";
        case LossFamily::logistic:
            return "logistic";
        case LossFamily::hinge:
            return "hinge";
    }
    return "unknown";
}

double SurrogateLossSpec::lipschitz() const {
    // All three families have non-decreasing derivatives, so the slope peaks at M.
    return raw_deriv(family, clamp);
}

double SurrogateLossSpec::bound() const { return raw_loss(family, clamp); }

void SurrogateLossSpec::validate() const {
    if (!(clamp > 0.0) || !std::isfinite(clamp)) {
        throw ConfigError("loss clamp must be a positive finite number");
    }
}

double eval_loss(const SurrogateLossSpec& spec, double margin) {
    require_finite(margin);
    return raw_loss(spec.family, std::clamp(margin, -spec.clamp, spec.clamp));
}

double eval_loss_deriv(const SurrogateLossSpec& spec, double margin) {
    require_finite(margin);
    if (margin < -spec.clamp || margin > spec.clamp) {
        return 0.0;
    }
    return raw_deriv(spec.family, margin);
}

}  // namespace tlnp
