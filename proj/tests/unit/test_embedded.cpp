#include "riskmdp/embedded.hpp"

#include "oracles.hpp"
#include "test_models.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace riskmdp;

namespace {
const ExtReal kInf = ExtReal::infinity();
}

TEST_CASE("sojourn_value branches") {
    CHECK(sojourn_value(0.0, 0.0, 0.0) == ExtReal(1.0));
    CHECK(sojourn_value(0.0, 0.5, 0.0) == kInf);
    CHECK(sojourn_value(2.0, 2.0, 3.0) == kInf);
    CHECK(sojourn_value(1.0, 4.0, 3.0) == kInf);
    CHECK(sojourn_value(1.0, 4.0, 0.0) == ExtReal(0.0));
    CHECK(sojourn_value(2.0, 1.0, 2.0) == ExtReal(2.0));
    CHECK(sojourn_value(3.0, 1.0, kInf) == kInf);
    CHECK(sojourn_value(3.0, 0.0, 3.0) == ExtReal(1.0));
    CHECK_THROWS_AS((void)sojourn_value(0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)sojourn_value(-1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("sojourn_value against quadrature of the sojourn integral") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double q = 0.01 + 10.0 * u(gen);
        const double c = q * u(gen) * 0.99;
        const double jm = 20.0 * u(gen);
        const double expected = testing::sojourn_quadrature(q, c, jm);
        CHECK(sojourn_value(q, c, jm).value() == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("jump mass uses 0 * inf = 0") {
    CtmdpModel m({"a", "b", "c"}, {"x"});
    m.set_rate(0, 0, 1, 2.0);
    const ValueTable v(std::vector<ExtReal>{1.0, 3.0, kInf});
    CHECK(jump_mass(m, 0, 0, v) == ExtReal(6.0));
    m.set_rate(0, 0, 2, 0.5);
    CHECK(jump_mass(m, 0, 0, v) == kInf);
}

TEST_CASE("bellman_apply on the absorbing chain") {
    const auto m = testing::absorbing_chain();
    const auto v1 = bellman_apply(m, ValueTable::ones(2));
    CHECK(v1[0] == ExtReal(1.0));
    CHECK(v1[1] == ExtReal(2.0));
    CHECK(bellman_apply(m, v1) == v1);
}

TEST_CASE("bellman_apply takes the minimum over actions") {
    const auto m = testing::trap_model();
    const ValueTable ones = ValueTable::ones(3);
    const auto v = bellman_apply(m, ones);
    CHECK(v[2] == ExtReal(1.0));
    CHECK(v[1] == kInf);
    // u: slow gives 1/(1-0.1), fast gives 3/(3-0.2).
    CHECK(v[0].value() == doctest::Approx(std::min(1.0 / 0.9, 3.0 / 2.8)));
    const StationaryPolicy slow{{0, 0, 0}};
    CHECK(bellman_apply_policy(m, slow, ones)[0].value() == doctest::Approx(1.0 / 0.9));
}

TEST_CASE("policy checks") {
    const auto m = testing::trap_model();
    CHECK_THROWS_AS(check_policy(m, StationaryPolicy{{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(check_policy(m, StationaryPolicy{{0, 2, 0}}), std::invalid_argument);
    CHECK_NOTHROW(check_policy(m, StationaryPolicy{{1, 1, 0}}));
}

TEST_CASE("operator is monotone in V") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = testing::random_model(gen);
        std::vector<ExtReal> lo;
        std::vector<ExtReal> hi;
        for (StateIndex x = 0; x < m.num_states(); ++x) {
            const double a = 1.0 + 3.0 * u(gen);
            lo.emplace_back(a);
            hi.push_back(u(gen) < 0.1 ? kInf : ExtReal(a + u(gen)));
        }
        const auto tlo = bellman_apply(m, ValueTable(lo));
        const auto thi = bellman_apply(m, ValueTable(hi));
        for (StateIndex x = 0; x < m.num_states(); ++x) CHECK(tlo[x] <= thi[x]);
    }
}
