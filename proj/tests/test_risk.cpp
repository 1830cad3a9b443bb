#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "tlnp/error.hpp"
#include "tlnp/risk.hpp"

using namespace tlnp;
using tlnp::testing::column;
using tlnp::testing::identity;

namespace {
const SurrogateLossSpec kExp{LossFamily::exponential, 20.0};
}

TEST_CASE("zero-one examples") {
    const Dataset normal = column({-1.0, 0.0, 2.0, -3.0}, Role::normal);
    CHECK(zero_one_type1(identity(), normal) == 0.5);
    const Dataset abnormal = column({-0.5, 0.5, 1.0}, Role::target_abnormal);
    CHECK(zero_one_type2(identity(), abnormal) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("surrogate examples") {
    const Dataset normal = column({1.0, -1.0}, Role::normal);
    CHECK(surrogate_type1(kExp, identity(), normal) == doctest::Approx(1.543081).epsilon(1e-6));
    CHECK(surrogate_type1(kExp, identity(), normal) ==
          doctest::Approx(std::cosh(1.0)).epsilon(1e-15));
    const Dataset abnormal = column({1.0, -1.0}, Role::source_abnormal);
    CHECK(surrogate_type2(kExp, identity(), abnormal) ==
          doctest::Approx(std::cosh(1.0)).epsilon(1e-15));
}

TEST_CASE("empty data and wrong roles") {
    const Dataset empty{Matrix(0, 1), Role::normal, SplitKind::train};
    CHECK_THROWS_AS(zero_one_type1(identity(), empty), UndefinedError);
    CHECK_THROWS_AS(surrogate_type1(kExp, identity(), empty), UndefinedError);
    const Dataset normal = column({1.0}, Role::normal);
    CHECK_THROWS_AS(zero_one_type2(identity(), normal), InputError);
    const Dataset abnormal = column({1.0}, Role::target_abnormal);
    CHECK_THROWS_AS(surrogate_type1(kExp, identity(), abnormal), InputError);
}

TEST_CASE("risks are bitwise invariant to row order") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z(0.0, 3.0);
    std::vector<double> values(997);
    for (double& v : values) v = z(rng);
    const Dataset a = column(values, Role::normal);
    for (int shuffle = 0; shuffle < 10; ++shuffle) {
        std::shuffle(values.begin(), values.end(), rng);
        const Dataset b = column(values, Role::normal);
        CHECK(surrogate_type1(kExp, identity(), a) == surrogate_type1(kExp, identity(), b));
        CHECK(zero_one_type1(identity(), a) == zero_one_type1(identity(), b));
    }
}

TEST_CASE("risk of a concatenation is the size-weighted average") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> va(13), vb(29);
    for (double& v : va) v = u(rng);
    for (double& v : vb) v = u(rng);
    const Dataset a = column(va, Role::target_abnormal);
    const Dataset b = column(vb, Role::target_abnormal);
    const Dataset ab = concatenate(a, b);
    const double expect =
        (13 * surrogate_type2(kExp, identity(), a) + 29 * surrogate_type2(kExp, identity(), b)) /
        42.0;
    CHECK(surrogate_type2(kExp, identity(), ab) == doctest::Approx(expect).epsilon(1e-13));
    const double expect01 =
        (13 * zero_one_type2(identity(), a) + 29 * zero_one_type2(identity(), b)) / 42.0;
    CHECK(zero_one_type2(identity(), ab) == doctest::Approx(expect01).epsilon(1e-14));
}

TEST_CASE("zero-one risks lie in [0, 1] with a finite grid") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> z;
    std::vector<double> values(50);
    for (double& v : values) v = z(rng);
    const Dataset d = column(values, Role::normal);
    const double r = zero_one_type1(identity(), d);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(std::abs(r * 50 - std::round(r * 50)) < 1e-12);
}

TEST_CASE("order_invariant_mean") {
    const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
    std::vector<double> w{1.0, -1e16, 1.0, 1e16};
    CHECK(order_invariant_mean(v) == order_invariant_mean(w));
    CHECK_THROWS_AS(order_invariant_mean(std::vector<double>{}), UndefinedError);
}
