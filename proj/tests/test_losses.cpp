#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "tlnp/error.hpp"
#include "tlnp/losses.hpp"

using namespace tlnp;

namespace {

// Truncated Taylor series of e^x, independent of std::exp.
double exp_series(double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= x / k;
        sum += term;
    }
    return sum;
}

const SurrogateLossSpec kExp{LossFamily::exponential, 20.0};
const SurrogateLossSpec kLogistic{LossFamily::logistic, 20.0};
const SurrogateLossSpec kHinge{LossFamily::hinge, 20.0};

}  // namespace

TEST_CASE("eval_loss examples") {
    CHECK(eval_loss(kExp, 0.0) == 1.0);
    CHECK(eval_loss(kExp, -1.0) == doctest::Approx(exp_series(-1.0)).epsilon(1e-14));
    CHECK(eval_loss(kExp, -1.0) == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK(eval_loss(kHinge, -2.0) == 0.0);
}

TEST_CASE("every family is normalized at zero") {
    for (const auto& spec : {kExp, kLogistic, kHinge}) {
        CHECK(eval_loss(spec, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("margins are clamped") {
    const SurrogateLossSpec tight{LossFamily::exponential, 2.0};
    CHECK(eval_loss(tight, 100.0) == doctest::Approx(std::exp(2.0)));
    CHECK(eval_loss(tight, -100.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(eval_loss_deriv(tight, 3.0) == 0.0);
    CHECK(eval_loss_deriv(tight, -3.0) == 0.0);
    CHECK(tight.bound() == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("eval_loss_deriv examples") {
    CHECK(eval_loss_deriv(kExp, 0.0) == 1.0);
    CHECK(eval_loss_deriv(kExp, 2.0) == doctest::Approx(7.389056).epsilon(1e-6));
    const double h = 1e-5;
    const double fd = (eval_loss(kExp, 2.0 + h) - eval_loss(kExp, 2.0 - h)) / (2 * h);
    CHECK(std::abs(eval_loss_deriv(kExp, 2.0) - fd) < 1e-6 * fd);
    CHECK(eval_loss_deriv(kHinge, -3.0) == 0.0);
    CHECK(eval_loss_deriv(kHinge, -1.0) == 1.0);
}

TEST_CASE("non-finite margins are rejected") {
    for (const auto& spec : {kExp, kLogistic, kHinge}) {
        CHECK_THROWS_AS(eval_loss(spec, std::numeric_limits<double>::quiet_NaN()), InputError);
        CHECK_THROWS_AS(eval_loss(spec, std::numeric_limits<double>::infinity()), InputError);
        CHECK_THROWS_AS(eval_loss_deriv(spec, -std::numeric_limits<double>::infinity()), InputError);
    }
}

TEST_CASE("Lipschitz bound holds on the clamped domain") {
    std::mt19937_64 rng(11);
    for (const auto& spec : {kExp, kLogistic, kHinge, SurrogateLossSpec{LossFamily::exponential, 3.0}}) {
        std::uniform_real_distribution<double> u(-spec.clamp, spec.clamp);
        const double lip = spec.lipschitz();
        for (int i = 0; i < 10000; ++i) {
            const double x = u(rng);
            const double y = u(rng);
            const double gap = std::abs(eval_loss(spec, x) - eval_loss(spec, y));
            // Relative slack for the exponential's large values near M.
            REQUIRE(gap <= lip * std::abs(x - y) * (1 + 1e-12) + 1e-12);
        }
    }
}

TEST_CASE("bound C dominates phi(x) and phi(-x)") {
    for (const auto& spec : {kExp, kLogistic, kHinge}) {
        for (double x = -spec.clamp; x <= spec.clamp; x += 0.25) {
            CHECK(std::max(eval_loss(spec, x), eval_loss(spec, -x)) <= spec.bound());
        }
    }
}

TEST_CASE("losses are non-decreasing") {
    std::mt19937_64 rng(5);
    for (const auto& spec : {kExp, kLogistic, kHinge}) {
        std::uniform_real_distribution<double> u(-25.0, 25.0);
        std::vector<double> grid(2000);
        for (double& g : grid) g = u(rng);
        std::sort(grid.begin(), grid.end());
        for (std::size_t i = 1; i < grid.size(); ++i) {
            REQUIRE(eval_loss(spec, grid[i - 1]) <= eval_loss(spec, grid[i]));
        }
    }
}

TEST_CASE("derivative matches central differences away from the kink") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-19.0, 19.0);
    const double h = 1e-5;
    for (const auto& spec : {kExp, kLogistic, kHinge}) {
        for (int i = 0; i < 1000; ++i) {
            const double x = u(rng);
            if (spec.family == LossFamily::hinge && std::abs(x + 1.0) < 1e-3) continue;
            const double fd = (eval_loss(spec, x + h) - eval_loss(spec, x - h)) / (2 * h);
            const double an = eval_loss_deriv(spec, x);
            if (an == 0.0) {
                REQUIRE(std::abs(fd) < 1e-9);
            } else {
                REQUIRE(std::abs(an - fd) / std::abs(an) < 1e-5);
            }
        }
    }
}

TEST_CASE("family names round-trip and invalid specs fail") {
    for (auto f : {LossFamily::exponential, LossFamily::logistic, LossFamily::hinge}) {
        CHECK(parse_loss_family(to_string(f)) == f);
    }
    CHECK_THROWS_AS(parse_loss_family("square"), ConfigError);
    CHECK_THROWS_AS((SurrogateLossSpec{LossFamily::hinge, 0.0}.validate()), ConfigError);
}
