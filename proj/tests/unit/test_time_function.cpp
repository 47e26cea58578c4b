#include "riskmdp/time_function.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

using riskmdp::ExpPolyTerm;
using riskmdp::TimeFunction;
using riskmdp::TimePiece;
using riskmdp::testing::quadrature;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 + 2 tau on [0, 0.5), then 0.5 e^{-tau} from 0.5 on.
TimeFunction ramp_then_decay() {
    return TimeFunction({TimePiece{0.0, {ExpPolyTerm{0.0, {1.0, 2.0}}}},
                         TimePiece{0.5, {ExpPolyTerm{1.0, {0.5}}}}});
}

TimeFunction random_function(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pieces(1, 4);
    std::uniform_int_distribution<int> degree(0, 3);
    std::vector<TimePiece> ps;
    double start = 0.0;
    const int n = pieces(gen);
    for (int i = 0; i < n; ++i) {
        TimePiece p{start, {}};
        const int terms = 1 + (u(gen) < 0.3);
        for (int k = 0; k < terms; ++k) {
            ExpPolyTerm term;
            // The last piece needs a decay or degree 0 so the tail stays integrable or constant.
            term.decay = (i == n - 1 || u(gen) < 0.5) ? 0.2 + 2.0 * u(gen) : 0.0;
            const int deg = degree(gen);
            for (int j = 0; j <= deg; ++j) term.coeffs.push_back(2.0 * u(gen));
            p.terms.push_back(term);
        }
        ps.push_back(p);
        start += 0.1 + u(gen);
    }
    return TimeFunction(ps);
}

}  // namespace

TEST_CASE("construction is validated") {
    CHECK_THROWS_AS(TimeFunction({TimePiece{1.0, {}}}), std::invalid_argument);
    CHECK_THROWS_AS(TimeFunction({TimePiece{0.0, {}}, TimePiece{0.0, {}}}), std::invalid_argument);
    CHECK_THROWS_AS(TimeFunction({TimePiece{0.0, {ExpPolyTerm{-1.0, {1.0}}}}}), std::invalid_argument);
    CHECK_THROWS_AS(TimeFunction({TimePiece{0.0, {ExpPolyTerm{0.0, {std::nan("")}}}}}), std::invalid_argument);
}

TEST_CASE("evaluation and left limits") {
    const auto f = ramp_then_decay();
    CHECK(f(0.0) == 1.0);
    CHECK(f(0.25) == doctest::Approx(1.5));
    CHECK(f(0.5) == doctest::Approx(0.5));
    CHECK(f.left_limit(0.5) == doctest::Approx(2.0));
    CHECK(f(1.5) == doctest::Approx(0.5 * std::exp(-1.0)));
    CHECK(f.breakpoints() == std::vector<double>{0.5});
    CHECK_FALSE(f.is_constant());
    CHECK(TimeFunction::constant(3.0).constant_value() == 3.0);
    CHECK(TimeFunction::zero().is_zero());
    CHECK_THROWS_AS((void)f.constant_value(), std::logic_error);
}

TEST_CASE("integrals of the sample function") {
    const auto f = ramp_then_decay();
    // 0.5 + 0.25 on the ramp, then 0.5 over the decaying tail.
    CHECK(f.integral(0.0, 0.5).value() == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(f.integral_to_infinity(0.0).value() == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(f.integral(0.25, 0.25).is_zero());
    CHECK(TimeFunction::constant(2.0).integral_to_infinity(0.0).is_inf());
    CHECK(TimeFunction::zero().integral_to_infinity(3.0).is_zero());
}

TEST_CASE("integrals match adaptive quadrature on random functions") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto f = random_function(gen);
        double a = u(gen);
        double b = u(gen);
        if (a > b) std::swap(a, b);
        double expected = 0.0;
        // Integrate piece by piece so the oracle never crosses a jump.
        std::vector<double> cuts{a};
        for (double t : f.breakpoints())
            if (t > a && t < b) cuts.push_back(t);
        cuts.push_back(b);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            expected += quadrature([&](double t) { return f(t); }, cuts[i], cuts[i + 1]);
        CHECK(f.integral(a, b).value() == doctest::Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("exp_monomial_integral closed forms") {
    // int_0^inf s^k e^{-l s} ds = k! / l^{k+1}
    CHECK(riskmdp::exp_monomial_integral(2.0, 3, kInf).value() == doctest::Approx(6.0 / 16.0).epsilon(1e-15));
    CHECK(riskmdp::exp_monomial_integral(0.0, 2, 3.0).value() == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(riskmdp::exp_monomial_integral(0.0, 0, kInf).is_inf());
    for (double l : {1e-6, 0.3, 7.0, 60.0})
        for (unsigned k : {0u, 1u, 4u, 9u})
            for (double len : {0.01, 1.0, 25.0}) {
                const double expected =
                    quadrature([&](double s) { return std::pow(s, k) * std::exp(-l * s); }, 0.0, len);
                CHECK(riskmdp::exp_monomial_integral(l, k, len).value() ==
                      doctest::Approx(expected).epsilon(1e-10));
            }
}

TEST_CASE("invert_integral") {
    const auto f = ramp_then_decay();
    SUBCASE("inside the ramp") {
        const auto t = f.invert_integral(0.0, 0.5);
        REQUIRE(t);
        CHECK(f.integral(0.0, *t).value() == doctest::Approx(0.5).epsilon(1e-11));
    }
    SUBCASE("in the decaying tail") {
        const auto t = f.invert_integral(0.0, 1.0);
        REQUIRE(t);
        // 0.75 + 0.5 (1 - e^{-(t - 0.5)}) = 1
        CHECK(*t == doctest::Approx(0.5 + std::log(2.0)).epsilon(1e-11));
    }
    SUBCASE("beyond the total mass") { CHECK_FALSE(f.invert_integral(0.0, 1.3)); }
    SUBCASE("constant rate in closed form") {
        CHECK(*TimeFunction::constant(4.0).invert_integral(1.0, 2.0) == 1.5);
    }
    SUBCASE("zero target") { CHECK(*f.invert_integral(0.7, 0.0) == 0.7); }
}

TEST_CASE("discounting, truncation and splicing") {
    const auto c = TimeFunction::constant(1.0);
    const auto d = c.discounted(2.0);
    CHECK(d(1.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(d.integral_to_infinity(0.0).value() == doctest::Approx(0.5));

    const auto f = ramp_then_decay().discounted(0.5);
    CHECK(f(0.75) == doctest::Approx(ramp_then_decay()(0.75) * std::exp(-0.375)));
    CHECK(f(0.25) == doctest::Approx(ramp_then_decay()(0.25) * std::exp(-0.125)));

    const auto tr = c.truncated(2.0);
    CHECK(tr(1.999) == 1.0);
    CHECK(tr(2.0) == 0.0);
    CHECK(tr.integral_to_infinity(0.0).value() == doctest::Approx(2.0));

    const auto sp = c.spliced(1.0, TimeFunction({TimePiece{0.0, {ExpPolyTerm{1.0, {3.0}}}}}));
    CHECK(sp(0.5) == 1.0);
    CHECK(sp(1.0) == doctest::Approx(3.0));
    CHECK(sp(2.0) == doctest::Approx(3.0 * std::exp(-1.0)));
    CHECK(sp.integral_to_infinity(0.0).value() == doctest::Approx(4.0));
}

TEST_CASE("sums merge breakpoints") {
    const auto g = TimeFunction::constant(1.0).truncated(0.3);
    const auto s = ramp_then_decay() + g;
    CHECK(s.breakpoints() == std::vector<double>{0.3, 0.5});
    for (double t : {0.0, 0.2, 0.3, 0.4, 0.5, 2.0}) CHECK(s(t) == doctest::Approx(ramp_then_decay()(t) + g(t)));
}

TEST_CASE("find_negative") {
    CHECK_FALSE(ramp_then_decay().find_negative());
    // 1 - tau on the last piece turns negative at t = 1.
    const TimeFunction tail({TimePiece{0.0, {ExpPolyTerm{0.0, {1.0, -1.0}}}}});
    const auto t = tail.find_negative();
    REQUIRE(t);
    CHECK(*t > 1.0);
    // (tau - 0.5)^2 - 0.01 dips below zero only near tau = 0.5, inside a bounded piece.
    const TimeFunction dip({TimePiece{0.0, {ExpPolyTerm{0.0, {0.24, -1.0, 1.0}}}}, TimePiece{2.0, {}}});
    CHECK(dip.find_negative());
    CHECK_FALSE(TimeFunction::constant(-0.0).find_negative());
}
