#pragma once

#include <string_view>

namespace tlnp {

enum class LossFamily { exponential, logistic, hinge };

LossFamily parse_loss_family(std::string_view name);
std::string_view to_string(LossFamily family);

// Surrogate loss phi together with the margin cap M. Margins are clamped to
// [-M, M] before evaluation, which makes phi L-Lipschitz and bounded by C.
struct SurrogateLossSpec {
    LossFamily family = LossFamily::exponential;
    double clamp = 20.0;

    // Largest slope of phi on [-M, M].
    double lipschitz() const;
    // sup of max{phi(x), phi(-x)} over [-M, M], i.e. phi(M).
    double bound() const;

    void validate() const;
};

// phi(clamp(margin, -M, M)). Throws InputError on a non-finite margin.
double eval_loss(const SurrogateLossSpec& spec, double margin);

// Derivative of the clamped loss; zero outside [-M, M]. The hinge kink at -1
// takes the right derivative.
double eval_loss_deriv(const SurrogateLossSpec& spec, double margin);

}  // namespace tlnp
