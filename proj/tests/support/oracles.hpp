#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace riskmdp::testing {

/// Adaptive Gauss-Kronrod quadrature of f over [a, b]; b may be +inf.
template <class F>
double quadrature(F f, double a, double b, double tol = 1e-12) {
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, tol, &err);
}

/**
 * One sojourn with exit rate q and cost rate c, integrated numerically in the
 * form it is written before any closed form is taken:
 *
 *     int_0^inf exp(-int_0^t (q - c) ds) * jump_mass dt + exp(-int_0^inf q) exp(int_0^inf c).
 *
 * Only meaningful for q > c, where the no-jump term is 0 * finite or vanishes.
 */
inline double sojourn_quadrature(double q, double c, double jump_mass) {
    auto integrand = [&](double t) {
        // The quadrature samples t = inf at the end of the mapped interval.
        if (std::isinf(t)) return 0.0;
        return std::exp(-(q * t - c * t)) * jump_mass;
    };
    const double scale = 1.0 / (q - c);
    // Split at a few decay lengths so the infinite tail is smooth after the map to [0, 1).
    return quadrature(integrand, 0.0, 8.0 * scale) +
           quadrature(integrand, 8.0 * scale, std::numeric_limits<double>::infinity());
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

/**
 * Crude explicit-Euler solution of a scalar backward ODE dV/dt = -h(t, V) on
 * [0, T] with V(T) = terminal, used only as an independent cross-check of
 * the RK4 integrator at loose tolerance.
 */
template <class H>
double euler_backward(H h, double horizon, double terminal, std::size_t steps) {
    const double dt = horizon / static_cast<double>(steps);
    double v = terminal;
    for (std::size_t k = steps; k > 0; --k) {
        const double t = dt * static_cast<double>(k);
        v += dt * h(t, v);
    }
    return v;
}

}  // namespace riskmdp::testing
