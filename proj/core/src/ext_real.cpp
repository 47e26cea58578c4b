#include "riskmdp/ext_real.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace riskmdp {

ExtReal::ExtReal(double value) {
    if (std::isnan(value) || value < 0.0) {
        throw std::domain_error("ExtReal: value must be a nonnegative number");
    }
    if (std::isinf(value)) {
        inf_ = true;
    } else {
        value_ = value;
    }
}

double ExtReal::value() const {
    if (inf_) throw std::logic_error("ExtReal::value() called on +inf");
    return value_;
}

double ExtReal::to_double() const noexcept {
    return inf_ ? std::numeric_limits<double>::infinity() : value_;
}

ExtReal operator+(const ExtReal& a, const ExtReal& b) noexcept {
    if (a.inf_ || b.inf_) return ExtReal::infinity();
    return ExtReal(a.value_ + b.value_);
}

ExtReal xmul(ExtReal a, ExtReal b) noexcept {
    if (a.is_zero() || b.is_zero()) return ExtReal{};
    if (a.is_inf() || b.is_inf()) return ExtReal::infinity();
    return ExtReal(a.value() * b.value());
}

ExtReal xdiv(ExtReal a, ExtReal b) noexcept {
    if (a.is_zero()) return ExtReal{};
    if (a.is_inf()) return ExtReal::infinity();
    if (b.is_inf()) return ExtReal{};
    if (b.is_zero()) return ExtReal::infinity();
    return ExtReal(a.value() / b.value());
}

ExtReal no_jump_term(ExtReal total_rate, ExtReal total_cost) noexcept {
    if (total_rate.is_inf()) return ExtReal{};
    if (total_cost.is_inf()) return ExtReal::infinity();
    return ExtReal(std::exp(total_cost.value() - total_rate.value()));
}

ExtReal xmin(ExtReal a, ExtReal b) noexcept { return b < a ? b : a; }
ExtReal xmax(ExtReal a, ExtReal b) noexcept { return a < b ? b : a; }

std::string to_string(const ExtReal& x) {
    if (x.is_inf()) return "inf";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x.value());
    (void)ec;
    return std::string(buf.data(), end);
}

std::ostream& operator<<(std::ostream& os, const ExtReal& x) { return os << to_string(x); }

}  // namespace riskmdp
