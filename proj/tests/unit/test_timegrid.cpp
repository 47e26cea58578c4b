#include "riskmdp/simulate.hpp"
#include "riskmdp/timegrid.hpp"

#include "oracles.hpp"
#include "test_models.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace riskmdp;

namespace {

constexpr double kE = std::numbers::e;

TimeVaryingModel unit_cost() { return TimeVaryingModel::from_homogeneous(testing::single_state(1.0)); }

double v0_unit_cost(double substep) {
    return solve_backward(unit_cost(), TimeGrid::uniform(1.0, 1.0), {1.0}, BackwardOptions{substep, false})
        .values.front()[0];
}

// Two actions into an absorbing state at the same rate; a0 costs 1 before t = 0.5 and 2 after, a1 costs 1.5.
TimeVaryingModel crossing_costs() {
    TimeVaryingModel m({"live", "done"}, {"a0", "a1"});
    m.set_rate(0, 0, 1, TimeFunction::constant(1.0));
    m.set_rate(0, 1, 1, TimeFunction::constant(1.0));
    m.set_cost(0, 0, TimeFunction({TimePiece{0.0, {ExpPolyTerm{0.0, {1.0}}}}, TimePiece{0.5, {ExpPolyTerm{0.0, {2.0}}}}}));
    m.set_cost(0, 1, TimeFunction::constant(1.5));
    return m;
}

}  // namespace

TEST_CASE("time grids") {
    CHECK_THROWS_AS(TimeGrid({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.2, 0.2}), std::invalid_argument);
    const auto g = TimeGrid::uniform(1.0, 0.3);
    CHECK(g.times() == std::vector<double>{0.0, 0.3, 0.6, 0.8999999999999999, 1.0});
    CHECK(TimeGrid::uniform(1.0, 0.25).size() == 5);
    CHECK(TimeGrid::uniform(0.1, 1.0).times() == std::vector<double>{0.0, 0.1});
}

TEST_CASE("constant cost: V(0) = e^{cT}") {
    CHECK(std::abs(v0_unit_cost(1e-3) - kE) <= 1e-6);
    const auto g = solve_backward(unit_cost(), TimeGrid::uniform(1.0, 0.25), {1.0}, BackwardOptions{1e-3, true});
    REQUIRE(g.error_estimate);
    CHECK(*g.error_estimate < 1e-10);
    for (std::size_t k = 0; k < g.times.size(); ++k)
        CHECK(g.values[k][0] == doctest::Approx(std::exp(1.0 - g.times[k])).epsilon(1e-12));
}

TEST_CASE("fourth-order convergence") {
    // Above roughly h = 2e-3 the error is truncation-dominated; below it sits at the rounding floor.
    for (double h : {0.1, 0.05, 0.02, 1e-2, 5e-3}) {
        const double e1 = std::abs(v0_unit_cost(h) - kE);
        const double e2 = std::abs(v0_unit_cost(h / 2) - kE);
        CAPTURE(h);
        CHECK(e1 / e2 >= 8.0);
    }
}

TEST_CASE("discounted cost: separable closed form") {
    const double alpha = 0.7;
    const double c0 = 1.3;
    const double T = 2.0;
    const auto m = augment_discounted(testing::single_state(c0), alpha);
    const auto g = solve_backward(m, TimeGrid::uniform(T, 0.5), {1.0});
    CHECK(g.values.front()[0] == doctest::Approx(std::exp(c0 * (1.0 - std::exp(-alpha * T)) / alpha)).epsilon(1e-10));
}

TEST_CASE("zero cost keeps V at 1 under any rates") {
    CtmdpModel h({"a", "b", "c"}, {"x"});
    h.set_rate(0, 0, 1, 3.0);
    h.set_rate(1, 0, 2, 1.0);
    h.set_rate(2, 0, 0, 0.5);
    const auto g = solve_backward(TimeVaryingModel::from_homogeneous(h), TimeGrid::uniform(3.0, 0.5), {1.0, 1.0, 1.0});
    for (const auto& row : g.values)
        for (double v : row) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("finite-horizon value") {
    SUBCASE("unit cost, T = 1") {
        const auto g = finite_horizon_value(unit_cost(), 1.0, 0.0, TerminalCost{{0.0}}, TimeGrid::uniform(1.0, 0.1));
        CHECK(std::abs(g.values.front()[0] - kE) <= 1e-6);
    }
    SUBCASE("terminal reproduced exactly") {
        const auto base = TimeVaryingModel::from_homogeneous(testing::absorbing_chain());
        const TerminalCost tc{{0.3, 1.7}};
        const auto g = finite_horizon_value(base, 2.0, 0.2, tc, TimeGrid::uniform(2.0, 0.5));
        CHECK(g.values.back()[0] == std::exp(0.3));
        CHECK(g.values.back()[1] == std::exp(1.7));
    }
    SUBCASE("g = ln 2 with zero cost stays at 2") {
        CtmdpModel h({"a", "b"}, {"x"});
        h.set_rate(0, 0, 1, 1.0);
        h.set_rate(1, 0, 0, 2.0);
        const TerminalCost tc{{std::log(2.0), std::log(2.0)}};
        const auto g = finite_horizon_value(TimeVaryingModel::from_homogeneous(h), 1.5, 0.0, tc,
                                            TimeGrid::uniform(1.5, 0.25));
        for (const auto& row : g.values)
            for (double v : row) CHECK(v == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("short horizon approaches the terminal value") {
        const auto g = finite_horizon_value(unit_cost(), 1e-9, 0.0, TerminalCost{{0.5}}, TimeGrid::uniform(1e-9, 1e-9));
        CHECK(g.values.front()[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-8));
    }
    SUBCASE("grid must end at T") {
        CHECK_THROWS_AS((void)finite_horizon_value(unit_cost(), 1.0, 0.0, TerminalCost{{0.0}}, TimeGrid::uniform(2.0, 0.5)),
                        std::invalid_argument);
    }
}

TEST_CASE("finite-horizon value against explicit Euler on a time-varying model") {
    // One live state with rate 1 + t to absorption and cost 2 - t on [0, 1]:
    // dV/dt = -((1 + t) * 1 + (2 - t - 1 - t) V) = -(1 + t) - (1 - 2t) V.
    TimeVaryingModel m({"live", "done"}, {"a"});
    m.set_rate(0, 0, 1, TimeFunction({TimePiece{0.0, {ExpPolyTerm{0.0, {1.0, 1.0}}}}}));
    m.set_cost(0, 0, TimeFunction({TimePiece{0.0, {ExpPolyTerm{0.0, {2.0, -1.0}}}}, TimePiece{1.0, {}}}));
    const auto g = finite_horizon_value(m, 1.0, 0.0, TerminalCost{{0.0, 0.0}}, TimeGrid::uniform(1.0, 0.1));
    const double euler = testing::euler_backward(
        [](double t, double v) { return (1.0 + t) + (1.0 - 2.0 * t) * v; }, 1.0, 1.0, 200000);
    CHECK(g.values.front()[0] == doctest::Approx(euler).epsilon(1e-5));
}

TEST_CASE("integration below the floor is an error") {
    TimeVaryingModel m({"x"}, {"a"});
    m.set_cost(0, 0, TimeFunction::constant(-1.0));
    CHECK_THROWS_AS((void)solve_backward(m, TimeGrid::uniform(1.0, 0.5), {1.0}), BackwardIntegrationError);
    CHECK_THROWS_AS((void)solve_backward(unit_cost(), TimeGrid::uniform(1.0, 0.5), {0.5}), std::invalid_argument);
}

TEST_CASE("discounted value, single state") {
    const double tail_tol = 1e-8;
    const auto sol = discounted_value(testing::single_state(1.0), 1.0, tail_tol, 0.05);
    const double th = sol.truncation_horizon;
    CHECK(th == doctest::Approx(-std::log(std::log1p(tail_tol))));
    CHECK(discounted_upper_band(1.0, 1.0, th) - 1.0 <= tail_tol * (1 + 1e-12));
    CHECK(std::abs(sol.value[0].value() - std::exp(1.0 - std::exp(-th))) <= 1e-6);
    CHECK(std::abs(sol.value[0].value() - kE) <= 2e-6);
    CHECK(sol.certified_error <= tail_tol + 1e-9);
    for (std::size_t k = 0; k < sol.grid.times.size(); ++k) {
        const double v = sol.grid.values[k][0];
        CHECK(v >= 1.0 - 1e-9);
        CHECK(v <= std::exp(std::exp(-sol.grid.times[k])) + 1e-9);
    }
}

TEST_CASE("discounted value, zero cost") {
    const auto sol = discounted_value(CtmdpModel({"a"}, {"x"}), 0.3, 1e-8, 0.1);
    CHECK(sol.value[0] == ExtReal(1.0));
    CHECK(sol.truncation_horizon == 0.1);
    CHECK_THROWS_AS((void)discounted_value(testing::single_state(1.0), 0.0, 1e-8, 0.1), std::invalid_argument);
}

TEST_CASE("discounted value, two-state absorbing chain against the MGF closed form") {
    // L*(1) = E[exp(int_0^tau e^{-t} dt)], tau ~ Exp(2): substituting u = e^{-tau} gives 2e - 4.
    const auto sol = discounted_value(testing::absorbing_chain(), 1.0, 1e-10, 0.05);
    CHECK(sol.value[1].value() == doctest::Approx(2.0 * kE - 4.0).epsilon(1e-8));
    CHECK(sol.value[0].value() == doctest::Approx(1.0).epsilon(1e-14));
    const double mc_closed = testing::quadrature([](double t) { return 2.0 * std::exp(-2.0 * t) * std::exp(1.0 - std::exp(-t)); },
                                                 0.0, 60.0);
    CHECK(mc_closed == doctest::Approx(2.0 * kE - 4.0).epsilon(1e-10));
}

TEST_CASE("Markov policy extraction") {
    SUBCASE("single action") {
        const auto m = TimeVaryingModel::from_homogeneous(testing::absorbing_chain());
        const auto g = finite_horizon_value(m, 1.0, 0.0, TerminalCost{{0.0, 0.0}}, TimeGrid::uniform(1.0, 0.25));
        const auto f = extract_markov_policy(m, g);
        for (const auto& row : f.action)
            for (ActionIndex a : row) CHECK(a == 0);
    }
    SUBCASE("cheaper action with identical rates") {
        TimeVaryingModel m({"live", "done"}, {"pricey", "cheap"});
        for (ActionIndex a : {0u, 1u}) m.set_rate(0, a, 1, TimeFunction::constant(2.0));
        m.set_cost(0, 0, TimeFunction::constant(1.0));
        m.set_cost(0, 1, TimeFunction::constant(0.5));
        const auto g = finite_horizon_value(m, 1.0, 0.0, TerminalCost{{0.0, 0.0}}, TimeGrid::uniform(1.0, 0.1));
        const auto f = extract_markov_policy(m, g);
        for (const auto& row : f.action) CHECK(row[0] == 1);
    }
    SUBCASE("switch at the crossing time") {
        const auto m = crossing_costs();
        const auto g = finite_horizon_value(m, 1.0, 0.0, TerminalCost{{0.0, 0.0}}, TimeGrid::uniform(1.0, 0.1));
        const auto f = extract_markov_policy(m, g);
        for (std::size_t k = 0; k < f.times.size(); ++k) {
            CAPTURE(f.times[k]);
            CHECK(f.action[k][0] == (f.times[k] < 0.5 - 1e-12 ? 0u : 1u));
        }
        CHECK(f(0.3, 0) == 0);
        CHECK(f(0.55, 0) == 1);
        CHECK(f.switch_times_after(0.75).size() == 3);
    }
}
