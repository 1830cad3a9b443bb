#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "tlnp/error.hpp"
#include "tlnp/oracle.hpp"
#include "tlnp/risk.hpp"

using namespace tlnp;
using tlnp::testing::column;
using tlnp::testing::line;

namespace {

const SurrogateLossSpec kExp{LossFamily::exponential, 20.0};

ClassRisks random_risks(std::mt19937_64& rng, std::size_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ClassRisks r;
    for (std::size_t i = 0; i < m; ++i) {
        // Coarse values so ties occur.
        r.type1.push_back(std::round(u(rng) * 10) / 100);
        r.target.push_back(std::round(u(rng) * 20) / 20);
        r.source.push_back(std::round(u(rng) * 20) / 20);
    }
    return r;
}

DiscreteLaw point_law(double x) {
    DiscreteLaw law;
    law.points = Matrix::Constant(1, 1, x);
    law.weights = {1.0};
    return law;
}

// Linear 1-d model with source risk e^{-h(1)} = rs and target risk e^{-h(0)} = rt.
Model with_risks(double rs, double rt) {
    const double b = -std::log(rt);
    const double a = -std::log(rs) - b;
    return line(a, b);
}

}  // namespace

TEST_CASE("target-hat example") {
    ClassRisks r;
    r.type1 = {0.04, 0.9};
    r.target = {0.5, 0.1};
    const OracleChoice c = solve_target_hat(r, 0.05, 0.01);
    CHECK(c.index == 0);
    CHECK(c.target == 0.5);
    ClassRisks single;
    single.type1 = {0.01};
    single.target = {0.7};
    CHECK(solve_target_hat(single, 0.05, 0.01).index == 0);
}

TEST_CASE("infeasible class raises") {
    ClassRisks r;
    r.type1 = {0.5, 0.9};
    r.target = {0.5, 0.1};
    r.source = {0.5, 0.1};
    CHECK_THROWS_AS(solve_target_hat(r, 0.05, 0.01), FeasibilityError);
    CHECK_THROWS_AS(solve_procedure8(r, 0.05, 0.01, 1.0, 10), FeasibilityError);
}

TEST_CASE("transfer solver picks the source-optimal feasible member") {
    ClassRisks r;
    r.type1 = {0.05, 0.05, 0.2};
    r.target = {0.30, 0.35, 0.10};
    r.source = {0.40, 0.20, 0.05};
    // slack 2 * 0.5 / sqrt(100) = 0.1
    const OracleChoice c = solve_procedure8(r, 0.05, 0.01, 0.5, 100);
    CHECK(c.index == 1);
    REQUIRE(c.source.has_value());
    CHECK(*c.source == 0.20);
    CHECK(solve_target_hat(r, 0.05, 0.01).index == 0);
    CHECK(solve_procedure8(r, 0.05, 0.01, 0.0, 100).index == 0);
}

TEST_CASE("transfer solver is never beaten by an exhaustive scan") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 500; ++trial) {
        const ClassRisks r = random_risks(rng, 1 + trial % 9);
        const double alpha = 0.05, eps = 0.01, c_tilde = 0.3;
        const std::size_t n_t = 25;
        bool any_feasible = false;
        for (double t : r.type1) any_feasible |= t <= alpha + eps / 2;
        if (!any_feasible) {
            CHECK_THROWS_AS(solve_procedure8(r, alpha, eps, c_tilde, n_t), FeasibilityError);
            continue;
        }
        const OracleChoice hat = solve_target_hat(r, alpha, eps);
        const OracleChoice pick = solve_procedure8(r, alpha, eps, c_tilde, n_t);
        const double bound = hat.target + 2 * c_tilde / std::sqrt(static_cast<double>(n_t));
        CHECK(pick.type1 <= alpha + eps / 2);
        CHECK(pick.target <= bound);
        for (std::size_t i = 0; i < r.type1.size(); ++i) {
            if (r.type1[i] <= alpha + eps / 2 && r.target[i] <= bound) {
                CHECK(r.source[i] >= *pick.source);
                if (r.source[i] == *pick.source) CHECK(i >= pick.index);
            }
            if (r.type1[i] <= alpha + eps / 2) {
                CHECK(r.target[i] >= hat.target);
            }
        }
        // Larger slack never raises the optimal source risk.
        const OracleChoice wider = solve_procedure8(r, alpha, eps, 2 * c_tilde, n_t);
        CHECK(*wider.source <= *pick.source);
    }
}

TEST_CASE("identical source and target with zero slack returns a target minimizer") {
    std::mt19937_64 rng(4);
    FiniteClass cls;
    for (int i = 0; i < 8; ++i) {
        Model m = init_model(ModelKind::linear, {2, 0}, 10 + i);
        m.params = testing::random_vector(3, rng, 0.5);
        cls.hypotheses.push_back(m);
    }
    cls.c_tilde = 0.0;
    const Dataset abnormal = testing::gaussian(50, 2, 1.0, Role::target_abnormal, 7);
    Dataset as_source = abnormal;
    as_source.role = Role::source_abnormal;
    const TrainingSet data{testing::gaussian(100, 2, 0.0, Role::normal, 8), abnormal, as_source};
    const OracleChoice hat = solve_target_hat(cls, data, kExp, 10.0, 0.0);
    const OracleChoice pick = solve_procedure8(cls, data, kExp, 10.0, 0.0);
    CHECK(std::abs(pick.target - hat.target) <= 1e-12);

    const ClassRisks r = compute_class_risks(cls, data, kExp);
    for (std::size_t i = 0; i < cls.size(); ++i) {
        CHECK(r.type1[i] == surrogate_type1(kExp, cls.hypotheses[i], data.normal));
        CHECK(r.target[i] == surrogate_type2(kExp, cls.hypotheses[i], data.target));
    }
}

TEST_CASE("exponent of identical source and target laws is (1, 1)") {
    std::mt19937_64 rng(6);
    FiniteClass cls;
    for (int i = 0; i < 6; ++i) {
        Model m = line(0.0, 0.0);
        m.params = testing::random_vector(2, rng, 1.0);
        cls.hypotheses.push_back(m);
    }
    DiscreteLaw abnormal;
    abnormal.points = Matrix(2, 1);
    abnormal.points << 0.5, 1.5;
    abnormal.weights = {0.3, 0.7};
    const auto est = estimate_transfer_exponent(cls, point_law(-1.0), abnormal, abnormal, kExp,
                                                1e6, 0.0, {0.5, 1.0, 2.0, 4.0});
    CHECK_FALSE(est.degenerate);
    CHECK(est.rho == 1.0);
    CHECK(est.c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("target excess equal to squared source excess gives rho = 0.5") {
    FiniteClass cls;
    cls.hypotheses.push_back(with_risks(0.1, 0.5));
    for (double s : {0.05, 0.1, 0.2, 0.5}) cls.hypotheses.push_back(with_risks(0.1 + s, 0.5 + s * s));
    const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
    const auto est = estimate_transfer_exponent(cls, point_law(-2.0), point_law(1.0),
                                                point_law(0.0), kExp, 1e6, 0.0, grid);
    CHECK_FALSE(est.degenerate);
    CHECK(est.reference_index == 0);
    CHECK(est.rho == 0.5);
    CHECK(est.c == doctest::Approx(1.0).epsilon(1e-9));
    // The fitted pair satisfies the inequality on every member.
    const double rs0 = 0.1, rt0 = 0.5;
    for (const Model& h : cls.hypotheses) {
        Vector one(1), zero(1);
        one << 1.0;
        zero << 0.0;
        const double s = std::exp(-forward(h, one)) - rs0;
        const double t = std::exp(-forward(h, zero)) - rt0;
        CHECK(est.c * s + 1e-9 >= std::pow(std::max(t, 0.0), est.rho));
    }
}

TEST_CASE("empty feasible set beyond the reference is degenerate") {
    FiniteClass cls;
    cls.hypotheses.push_back(with_risks(0.1, 0.5));
    cls.hypotheses.push_back(with_risks(0.2, 0.51));
    // Normal risks at x = -2 are about 0.08 and 0.30.
    const auto est = estimate_transfer_exponent(cls, point_law(-2.0), point_law(1.0),
                                                point_law(0.0), kExp, 0.1, 0.0, {1.0});
    CHECK(est.degenerate);
    CHECK(est.rho == 1.0);
    CHECK(est.c == 1.0);
}

TEST_CASE("discrete law validation and JSON") {
    DiscreteLaw law;
    law.points = Matrix(2, 1);
    law.points << 1.0, 2.0;
    law.weights = {0.5, 0.5};
    const nlohmann::json j = law;
    const DiscreteLaw back = j.get<DiscreteLaw>();
    CHECK(back.points == law.points);
    CHECK(back.weights == law.weights);
    law.weights = {0.5, 0.6};
    CHECK_THROWS(law.validate());
}
