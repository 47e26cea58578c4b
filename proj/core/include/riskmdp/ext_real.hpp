#pragma once

#include <compare>
#include <iosfwd>
#include <string>

namespace riskmdp {

/**
 * A nonnegative extended real, an element of [0, +inf].
 *
 * Infinity is a tag, not an IEEE infinity, so the products and quotients
 * below follow the measure-theoretic conventions
 *
 *     0/0 := 0,   0 * inf := 0,   1/0 := +inf,   inf - inf := inf
 *
 * instead of producing NaN. Construction from a negative or NaN double
 * throws std::domain_error; constructing from +HUGE_VAL yields the tagged
 * infinity.
 */
class ExtReal {
public:
    constexpr ExtReal() noexcept = default;
    ExtReal(double value);  // NOLINT(google-explicit-constructor): finite literals read naturally

    static constexpr ExtReal infinity() noexcept { return ExtReal(Tag{}); }

    [[nodiscard]] constexpr bool is_inf() const noexcept { return inf_; }
    [[nodiscard]] constexpr bool is_finite() const noexcept { return !inf_; }
    [[nodiscard]] constexpr bool is_zero() const noexcept { return !inf_ && value_ == 0.0; }

    /// Finite payload; throws std::logic_error on +inf.
    [[nodiscard]] double value() const;
    /// IEEE view, mapping the tag to +HUGE_VAL. Only for output and plotting.
    [[nodiscard]] double to_double() const noexcept;

    friend constexpr bool operator==(const ExtReal& a, const ExtReal& b) noexcept {
        return a.inf_ == b.inf_ && (a.inf_ || a.value_ == b.value_);
    }
    friend constexpr std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) noexcept {
        if (a.inf_ || b.inf_) {
            return a.inf_ == b.inf_ ? std::partial_ordering::equivalent
                   : a.inf_         ? std::partial_ordering::greater
                                    : std::partial_ordering::less;
        }
        return a.value_ <=> b.value_;
    }

    friend ExtReal operator+(const ExtReal& a, const ExtReal& b) noexcept;
    ExtReal& operator+=(const ExtReal& other) noexcept { return *this = *this + other; }

private:
    struct Tag {};
    constexpr explicit ExtReal(Tag) noexcept : value_(0.0), inf_(true) {}

    double value_ = 0.0;
    bool inf_ = false;
};

/// Product with 0 * inf = inf * 0 = 0.
[[nodiscard]] ExtReal xmul(ExtReal a, ExtReal b) noexcept;

/// Quotient with 0/0 = 0, a/0 = inf for a > 0, finite/inf = 0, inf/finite = inf.
/// inf/inf is taken as inf (the inf - inf := inf reading of an indeterminate form).
[[nodiscard]] ExtReal xdiv(ExtReal a, ExtReal b) noexcept;

/**
 * The contribution exp(-Q) * exp(C) of never jumping again, where Q and C are
 * the total rate and cost integrals over the remaining sojourn.
 *
 * Q = inf gives 0 whatever C is (read as 0 * exp(C) with 0 * inf := 0);
 * otherwise C = inf gives inf, and finite arguments give exp(C - Q).
 */
[[nodiscard]] ExtReal no_jump_term(ExtReal total_rate, ExtReal total_cost) noexcept;

[[nodiscard]] ExtReal xmin(ExtReal a, ExtReal b) noexcept;
[[nodiscard]] ExtReal xmax(ExtReal a, ExtReal b) noexcept;

/// "inf" for the tag, shortest round-trip decimal otherwise.
[[nodiscard]] std::string to_string(const ExtReal& x);
std::ostream& operator<<(std::ostream& os, const ExtReal& x);

}  // namespace riskmdp
