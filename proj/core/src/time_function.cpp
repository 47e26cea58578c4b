#include "riskmdp/time_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace riskmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBisectionTol = 1e-12;

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double eval_term(const ExpPolyTerm& term, double tau) {
    const double p = horner(term.coeffs, tau);
    return term.decay == 0.0 ? p : p * std::exp(-term.decay * tau);
}

// d/dtau [exp(-l tau) p(tau)] = exp(-l tau) (p'(tau) - l p(tau))
double eval_term_derivative(const ExpPolyTerm& term, double tau) {
    double dp = 0.0;
    for (std::size_t k = term.coeffs.size(); k-- > 1;) dp = dp * tau + static_cast<double>(k) * term.coeffs[k];
    const double p = horner(term.coeffs, tau);
    return std::exp(-term.decay * tau) * (dp - term.decay * p);
}

bool is_zero_poly(const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

// Coefficients of p(delta + s) in powers of s.
std::vector<double> taylor_shift(const std::vector<double>& c, double delta) {
    if (delta == 0.0 || c.size() <= 1) return c;
    std::vector<double> out(c);
    // Repeated synthetic division (Ruffini-Horner shift).
    const std::size_t n = out.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t k = n - 1; k-- > i;) out[k] += delta * out[k + 1];
    }
    return out;
}

ExpPolyTerm shift_term(const ExpPolyTerm& term, double delta) {
    ExpPolyTerm out{term.decay, taylor_shift(term.coeffs, delta)};
    if (term.decay != 0.0 && delta != 0.0) {
        const double scale = std::exp(-term.decay * delta);
        for (double& v : out.coeffs) v *= scale;
    }
    return out;
}

void add_term(std::vector<ExpPolyTerm>& terms, ExpPolyTerm term) {
    if (is_zero_poly(term.coeffs)) return;
    for (auto& existing : terms) {
        if (existing.decay == term.decay) {
            if (existing.coeffs.size() < term.coeffs.size()) existing.coeffs.resize(term.coeffs.size(), 0.0);
            for (std::size_t k = 0; k < term.coeffs.size(); ++k) existing.coeffs[k] += term.coeffs[k];
            return;
        }
    }
    terms.push_back(std::move(term));
}

double factorial(unsigned k) {
    double f = 1.0;
    for (unsigned i = 2; i <= k; ++i) f *= i;
    return f;
}

double piece_value(const TimePiece& piece, double tau) {
    double v = 0.0;
    for (const auto& term : piece.terms) v += eval_term(term, tau);
    return v;
}

double piece_derivative(const TimePiece& piece, double tau) {
    double v = 0.0;
    for (const auto& term : piece.terms) v += eval_term_derivative(term, tau);
    return v;
}

// Integral of a piece over local [u0, u1], u1 possibly +inf.
ExtReal piece_integral(const TimePiece& piece, double u0, double u1) {
    if (!(u1 > u0)) return ExtReal{};
    const double length = u1 - u0;
    double sum = 0.0;
    for (const auto& term : piece.terms) {
        const ExpPolyTerm shifted = shift_term(term, u0);
        for (unsigned k = 0; k < shifted.coeffs.size(); ++k) {
            const double ck = shifted.coeffs[k];
            if (ck == 0.0) continue;
            const ExtReal jk = exp_monomial_integral(shifted.decay, k, length);
            if (jk.is_inf()) {
                // Only reachable on an unbounded tail with a non-decaying term; a
                // nonnegative function with such a term has infinite mass.
                return ExtReal::infinity();
            }
            sum += ck * jk.value();
        }
    }
    return ExtReal(std::max(sum, 0.0));
}

bool piece_is_constant(const TimePiece& piece) {
    return std::all_of(piece.terms.begin(), piece.terms.end(),
                       [](const ExpPolyTerm& t) { return t.decay == 0.0 && t.coeffs.size() <= 1; });
}

double coefficient_scale(const TimePiece& piece) {
    double scale = 0.0;
    for (const auto& term : piece.terms)
        for (double c : term.coeffs) scale = std::max(scale, std::abs(c));
    return scale;
}

std::optional<double> piece_find_negative(const TimePiece& piece, double length) {
    if (piece.terms.empty()) return std::nullopt;
    const double tol = 1e-12 * std::max(1.0, coefficient_scale(piece));

    double horizon = length;
    if (!std::isfinite(length)) {
        // Past every term's Cauchy root bound each term keeps the sign of its
        // leading coefficient; a negative leading term must be dominated by a
        // slower-decaying positive one.
        horizon = 1.0;
        for (const auto& term : piece.terms) {
            const auto& c = term.coeffs;
            std::size_t lead = c.size();
            while (lead > 0 && c[lead - 1] == 0.0) --lead;
            if (lead == 0) continue;
            double bound = 1.0;
            for (std::size_t k = 0; k + 1 < lead; ++k) bound = std::max(bound, 1.0 + std::abs(c[k] / c[lead - 1]));
            horizon = std::max(horizon, 2.0 * bound);
        }
        for (const auto& term : piece.terms) {
            std::size_t lead = term.coeffs.size();
            while (lead > 0 && term.coeffs[lead - 1] == 0.0) --lead;
            if (lead == 0 || term.coeffs[lead - 1] >= 0.0) continue;
            const bool dominated = std::any_of(piece.terms.begin(), piece.terms.end(), [&](const ExpPolyTerm& other) {
                std::size_t l = other.coeffs.size();
                while (l > 0 && other.coeffs[l - 1] == 0.0) --l;
                return l > 0 && other.coeffs[l - 1] > 0.0 &&
                       (other.decay < term.decay || (other.decay == term.decay && l > lead));
            });
            if (!dominated) return horizon * 4.0;
        }
    }

    constexpr int kSamples = 512;
    double prev_tau = 0.0;
    double prev_d = piece_derivative(piece, 0.0);
    if (piece_value(piece, 0.0) < -tol) return 0.0;
    for (int i = 1; i <= kSamples; ++i) {
        double tau = horizon * static_cast<double>(i) / kSamples;
        if (i == kSamples && std::isfinite(length)) tau = std::nextafter(length, 0.0);
        const double v = piece_value(piece, tau);
        if (v < -tol) return tau;
        const double d = piece_derivative(piece, tau);
        if (prev_d < 0.0 && d > 0.0) {
            double lo = prev_tau;
            double hi = tau;
            for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (piece_derivative(piece, mid) < 0.0 ? lo : hi) = mid;
            }
            if (piece_value(piece, lo) < -tol) return lo;
        }
        prev_tau = tau;
        prev_d = d;
    }
    return std::nullopt;
}

}  // namespace

ExtReal exp_monomial_integral(double decay, unsigned k, double length) {
    if (!(length > 0.0)) return ExtReal{};
    const double kp1 = static_cast<double>(k) + 1.0;
    if (decay == 0.0) {
        if (std::isinf(length)) return ExtReal::infinity();
        return ExtReal(std::pow(length, kp1) / kp1);
    }
    const double tail = factorial(k) / std::pow(decay, kp1);
    if (std::isinf(length)) return ExtReal(tail);
    const double x = decay * length;
    if (x < kp1) {
        // Lower incomplete gamma series; all terms positive.
        double term = std::pow(length, kp1) / kp1;
        double sum = term;
        for (unsigned n = 1; n < 500; ++n) {
            term *= x / (kp1 + n);
            sum += term;
            if (term <= sum * 1e-17) break;
        }
        return ExtReal(std::exp(-x) * sum);
    }
    double partial = 1.0;
    double power = 1.0;
    for (unsigned j = 1; j <= k; ++j) {
        power *= x / j;
        partial += power;
    }
    return ExtReal(std::max(0.0, tail * (1.0 - std::exp(-x) * partial)));
}

TimeFunction::TimeFunction(std::vector<TimePiece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) pieces_.push_back(TimePiece{});
    if (pieces_.front().start != 0.0) throw std::invalid_argument("TimeFunction: first piece must start at t=0");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (!std::isfinite(pieces_[i].start)) throw std::invalid_argument("TimeFunction: piece start must be finite");
        if (i > 0 && !(pieces_[i].start > pieces_[i - 1].start))
            throw std::invalid_argument("TimeFunction: piece starts must be strictly increasing");
        for (const auto& term : pieces_[i].terms) {
            if (!std::isfinite(term.decay) || term.decay < 0.0)
                throw std::invalid_argument("TimeFunction: decay must be finite and nonnegative");
            for (double c : term.coeffs)
                if (!std::isfinite(c)) throw std::invalid_argument("TimeFunction: coefficients must be finite");
        }
    }
}

TimeFunction TimeFunction::constant(double value) {
    if (value == 0.0) return TimeFunction{};
    return TimeFunction({TimePiece{0.0, {ExpPolyTerm{0.0, {value}}}}});
}

std::size_t TimeFunction::piece_index(double t) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double v, const TimePiece& p) { return v < p.start; });
    return it == pieces_.begin() ? 0 : static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

std::size_t TimeFunction::piece_index_left(double t) const {
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), t,
                               [](const TimePiece& p, double v) { return p.start < v; });
    return it == pieces_.begin() ? 0 : static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

double TimeFunction::piece_end(std::size_t i) const {
    return i + 1 < pieces_.size() ? pieces_[i + 1].start : kInf;
}

double TimeFunction::operator()(double t) const {
    const auto& piece = pieces_[piece_index(t)];
    return piece_value(piece, t - piece.start);
}

double TimeFunction::left_limit(double t) const {
    const auto& piece = pieces_[piece_index_left(t)];
    return piece_value(piece, t - piece.start);
}

ExtReal TimeFunction::integral(double from, double to) const {
    if (!(to > from)) return ExtReal{};
    ExtReal total;
    for (std::size_t i = piece_index(from); i < pieces_.size(); ++i) {
        const double a = std::max(from, pieces_[i].start);
        const double b = std::min(to, piece_end(i));
        if (a >= to) break;
        total += piece_integral(pieces_[i], a - pieces_[i].start, b - pieces_[i].start);
        if (total.is_inf()) break;
    }
    return total;
}

ExtReal TimeFunction::integral_to_infinity(double from) const { return integral(from, kInf); }

std::optional<double> TimeFunction::invert_integral(double from, double target) const {
    if (!(target > 0.0)) return from;
    double acc = 0.0;
    for (std::size_t i = piece_index(from); i < pieces_.size(); ++i) {
        const TimePiece& piece = pieces_[i];
        const double a = std::max(from, piece.start);
        const double b = piece_end(i);
        const ExtReal mass = piece_integral(piece, a - piece.start, b - piece.start);
        if (mass.is_finite() && acc + mass.value() < target) {
            acc += mass.value();
            continue;
        }
        const double remaining = target - acc;
        if (piece_is_constant(piece)) {
            const double rate = piece_value(piece, 0.0);
            return std::min(b, a + remaining / rate);
        }
        const double u0 = a - piece.start;
        auto mass_to = [&](double tau) { return piece_integral(piece, u0, tau).to_double(); };
        double lo = u0;
        double hi = b - piece.start;
        if (std::isinf(hi)) {
            double width = 1.0;
            hi = u0 + width;
            while (mass_to(hi) < remaining) {
                lo = hi;
                width *= 2.0;
                hi = u0 + width;
                if (std::isinf(hi)) return std::nullopt;
            }
        }
        while (hi - lo > kBisectionTol * std::max(1.0, std::abs(hi))) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (mass_to(mid) >= remaining ? hi : lo) = mid;
        }
        return piece.start + hi;
    }
    return std::nullopt;
}

bool TimeFunction::is_constant() const noexcept {
    return pieces_.size() == 1 && piece_is_constant(pieces_.front());
}

bool TimeFunction::is_zero() const noexcept {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const TimePiece& p) {
        return std::all_of(p.terms.begin(), p.terms.end(), [](const ExpPolyTerm& t) { return is_zero_poly(t.coeffs); });
    });
}

double TimeFunction::constant_value() const {
    if (!is_constant()) throw std::logic_error("TimeFunction: not a constant function");
    return piece_value(pieces_.front(), 0.0);
}

std::vector<double> TimeFunction::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].start);
    return out;
}

TimeFunction TimeFunction::discounted(double alpha) const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("discount rate must be finite and >= 0");
    if (alpha == 0.0) return *this;
    std::vector<TimePiece> out = pieces_;
    for (auto& piece : out) {
        const double scale = std::exp(-alpha * piece.start);
        std::vector<ExpPolyTerm> terms;
        for (auto term : piece.terms) {
            term.decay += alpha;
            for (double& c : term.coeffs) c *= scale;
            add_term(terms, std::move(term));
        }
        piece.terms = std::move(terms);
    }
    return TimeFunction(std::move(out));
}

TimeFunction TimeFunction::truncated(double horizon) const { return spliced(horizon, TimeFunction{}); }

TimeFunction TimeFunction::spliced(double horizon, const TimeFunction& tail) const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("splice time must be finite and > 0");
    std::vector<TimePiece> out;
    for (const auto& piece : pieces_) {
        if (piece.start >= horizon) break;
        out.push_back(piece);
    }
    for (auto piece : tail.pieces_) {
        piece.start += horizon;
        out.push_back(std::move(piece));
    }
    return TimeFunction(std::move(out));
}

TimeFunction operator+(const TimeFunction& a, const TimeFunction& b) {
    std::vector<double> starts;
    for (const auto& p : a.pieces_) starts.push_back(p.start);
    for (const auto& p : b.pieces_) starts.push_back(p.start);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

    std::vector<TimePiece> out;
    out.reserve(starts.size());
    for (double s : starts) {
        TimePiece merged{s, {}};
        for (const TimeFunction* f : {&a, &b}) {
            const TimePiece& src = f->pieces_[f->piece_index(s)];
            for (const auto& term : src.terms) add_term(merged.terms, shift_term(term, s - src.start));
        }
        out.push_back(std::move(merged));
    }
    return TimeFunction(std::move(out));
}

std::optional<double> TimeFunction::find_negative() const {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const double length = piece_end(i) - pieces_[i].start;
        if (auto tau = piece_find_negative(pieces_[i], length)) return pieces_[i].start + *tau;
    }
    return std::nullopt;
}

}  // namespace riskmdp
