#pragma once

#include "riskmdp/ext_real.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace riskmdp {

/// exp(-decay * tau) * (coeffs[0] + coeffs[1] tau + ...), tau measured from the piece start.
struct ExpPolyTerm {
    double decay = 0.0;
    std::vector<double> coeffs;

    friend bool operator==(const ExpPolyTerm&, const ExpPolyTerm&) = default;
};

/// One piece of a TimeFunction; it covers [start, next piece's start) and the
/// last piece extends to +inf. An empty term list is the zero function.
struct TimePiece {
    double start = 0.0;
    std::vector<ExpPolyTerm> terms;

    friend bool operator==(const TimePiece&, const TimePiece&) = default;
};

/**
 * A nonnegative piecewise exponential-polynomial function of time on [0, inf).
 *
 * This is the representation for every time-varying rate and cost entry. It is
 * closed under sums, under multiplication by exp(-alpha t), and under
 * truncation, which is what the discounted and finite-horizon reformulations
 * need, and its integrals have closed forms.
 *
 * Well-formedness (first piece starts at 0, starts strictly increasing, finite
 * coefficients, nonnegative decays) is enforced on construction.
 * Nonnegativity is a model property and is checked by find_negative().
 */
class TimeFunction {
public:
    TimeFunction() : pieces_{TimePiece{}} {}
    explicit TimeFunction(std::vector<TimePiece> pieces);

    static TimeFunction constant(double value);
    static TimeFunction zero() { return TimeFunction{}; }

    [[nodiscard]] const std::vector<TimePiece>& pieces() const noexcept { return pieces_; }

    /// Value at t, taking the piece that contains t in [start, next).
    [[nodiscard]] double operator()(double t) const;
    /// Left limit at t > 0, taking the piece that contains t in (start, next].
    [[nodiscard]] double left_limit(double t) const;

    /// Integral over [from, to]; `to` may be +inf.
    [[nodiscard]] ExtReal integral(double from, double to) const;
    [[nodiscard]] ExtReal integral_to_infinity(double from) const;

    /**
     * Smallest t >= from with integral(from, t) >= target, or nullopt when
     * the total mass on [from, inf) is below target. Constant pieces are
     * inverted in closed form, other pieces by bisection.
     */
    [[nodiscard]] std::optional<double> invert_integral(double from, double target) const;

    [[nodiscard]] bool is_constant() const noexcept;
    [[nodiscard]] bool is_zero() const noexcept;
    /// Value of a constant function; throws std::logic_error otherwise.
    [[nodiscard]] double constant_value() const;

    /// Piece starts other than 0.
    [[nodiscard]] std::vector<double> breakpoints() const;

    /// f(t) * exp(-alpha t).
    [[nodiscard]] TimeFunction discounted(double alpha) const;
    /// f(t) on [0, horizon), zero afterwards.
    [[nodiscard]] TimeFunction truncated(double horizon) const;
    /// f on [0, horizon), tail on [horizon, inf). The tail's own time origin is `horizon`.
    [[nodiscard]] TimeFunction spliced(double horizon, const TimeFunction& tail) const;

    friend TimeFunction operator+(const TimeFunction& a, const TimeFunction& b);
    friend bool operator==(const TimeFunction&, const TimeFunction&) = default;

    /// First t where the function is detectably negative, searching every piece
    /// (infinite tails up to a root bound). nullopt when nonnegative.
    [[nodiscard]] std::optional<double> find_negative() const;

private:
    [[nodiscard]] std::size_t piece_index(double t) const;
    [[nodiscard]] std::size_t piece_index_left(double t) const;
    [[nodiscard]] double piece_end(std::size_t i) const;

    std::vector<TimePiece> pieces_;
};

/// Closed-form integral of exp(-decay s) * s^k over [0, length]; length may be +inf.
[[nodiscard]] ExtReal exp_monomial_integral(double decay, unsigned k, double length);

}  // namespace riskmdp
