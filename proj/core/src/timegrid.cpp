#include "riskmdp/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace riskmdp {

namespace {

constexpr double kFloorSlack = 1e-9;

enum class Side { right, left };

double eval(const TimeFunction& f, double t, Side side) { return side == Side::left ? f.left_limit(t) : f(t); }

// Right-hand side of the backward equation: G(t, V)[x] = min_a bracket, with
// dV/dt = -G, so stepping backward by h adds h * G.
class Rhs {
public:
    explicit Rhs(const TimeVaryingModel& m) : m_(m) {}

    void operator()(double t, Side side, const std::vector<double>& v, std::vector<double>& out) const {
        const std::size_t n = m_.num_states();
        out.resize(n);
        for (StateIndex x = 0; x < n; ++x) {
            double best = std::numeric_limits<double>::infinity();
            for (ActionIndex a = 0; a < m_.num_actions(); ++a) best = std::min(best, bracket(t, side, x, a, v));
            out[x] = best;
        }
    }

    [[nodiscard]] double bracket(double t, Side side, StateIndex x, ActionIndex a, const std::vector<double>& v) const {
        double mass = 0.0;
        double exit = 0.0;
        for (StateIndex y = 0; y < m_.num_states(); ++y) {
            if (y == x) continue;
            const double r = eval(m_.rate_fn(x, a, y), t, side);
            if (r == 0.0) continue;
            mass += r * v[y];
            exit += r;
        }
        return mass + (eval(m_.cost_fn(x, a), t, side) - exit) * v[x];
    }

private:
    const TimeVaryingModel& m_;
};

void check_floor(const std::vector<double>& v, double t, const TimeVaryingModel& m) {
    for (StateIndex x = 0; x < v.size(); ++x) {
        if (!(v[x] >= 1.0 - kFloorSlack)) {
            std::ostringstream os;
            os.precision(17);
            os << "backward integration left [1, inf) at t=" << t << ", state '" << m.states()[x] << "': V=" << v[x]
               << " (step too large or invalid model)";
            throw BackwardIntegrationError(os.str());
        }
    }
}

MarkovValueGrid integrate(const TimeVaryingModel& m, const TimeGrid& grid, const std::vector<double>& terminal,
                          double max_substep) {
    const std::size_t n = m.num_states();
    const std::size_t K = grid.size() - 1;
    const Rhs rhs(m);
    const std::vector<double> model_breaks = m.breakpoints();

    MarkovValueGrid out;
    out.times = grid.times();
    out.values.assign(K + 1, {});
    out.values[K] = terminal;

    std::vector<double> v = terminal;
    std::vector<double> k1, k2, k3, k4, tmp(n);
    for (std::size_t k = K; k-- > 0;) {
        const double lo = grid[k];
        const double hi = grid[k + 1];
        std::vector<double> cuts{hi};
        for (auto it = model_breaks.rbegin(); it != model_breaks.rend(); ++it)
            if (*it > lo && *it < hi) cuts.push_back(*it);
        cuts.push_back(lo);

        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double seg_hi = cuts[c];
            const double seg_lo = cuts[c + 1];
            const auto steps = static_cast<std::size_t>(std::ceil((seg_hi - seg_lo) / max_substep - 1e-9));
            const std::size_t count = std::max<std::size_t>(steps, 1);
            const double h = (seg_hi - seg_lo) / static_cast<double>(count);
            for (std::size_t s = 0; s < count; ++s) {
                const double t_hi = seg_hi - static_cast<double>(s) * h;
                const double t_mid = t_hi - 0.5 * h;
                const double t_lo = s + 1 == count ? seg_lo : t_hi - h;
                rhs(t_hi, Side::left, v, k1);
                for (std::size_t x = 0; x < n; ++x) tmp[x] = v[x] + 0.5 * h * k1[x];
                rhs(t_mid, Side::right, tmp, k2);
                for (std::size_t x = 0; x < n; ++x) tmp[x] = v[x] + 0.5 * h * k2[x];
                rhs(t_mid, Side::right, tmp, k3);
                for (std::size_t x = 0; x < n; ++x) tmp[x] = v[x] + h * k3[x];
                rhs(t_lo, Side::right, tmp, k4);
                for (std::size_t x = 0; x < n; ++x) v[x] += h / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
                check_floor(v, t_lo, m);
            }
        }
        out.values[k] = v;
    }
    return out;
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw std::invalid_argument("time grid needs at least two points");
    if (times_.front() != 0.0) throw std::invalid_argument("time grid must start at t=0");
    for (std::size_t k = 1; k < times_.size(); ++k)
        if (!(times_[k] > times_[k - 1]) || !std::isfinite(times_[k]))
            throw std::invalid_argument("time grid must be finite and strictly increasing");
}

TimeGrid TimeGrid::uniform(double horizon, double step) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("grid horizon must be finite and > 0");
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
    std::vector<double> times{0.0};
    const auto cells = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    for (std::size_t k = 1; k < cells; ++k) times.push_back(static_cast<double>(k) * step);
    times.push_back(horizon);
    return TimeGrid(std::move(times));
}

ValueTable MarkovValueGrid::initial() const {
    ValueTable out;
    for (double v : values.front()) out.v.emplace_back(v);
    return out;
}

ActionIndex MarkovPolicyGrid::operator()(double t, StateIndex x) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    return action[k][x];
}

std::vector<double> MarkovPolicyGrid::switch_times_after(double t) const {
    std::vector<double> out;
    for (double s : times)
        if (s > t) out.push_back(s);
    return out;
}

MarkovValueGrid solve_backward(const TimeVaryingModel& m, const TimeGrid& grid, const std::vector<double>& terminal,
                               const BackwardOptions& opts) {
    if (terminal.size() != m.num_states()) throw std::invalid_argument("terminal values must cover every state");
    for (double v : terminal)
        if (!(v >= 1.0) || !std::isfinite(v)) throw std::invalid_argument("terminal values must be finite and >= 1");
    if (!(opts.max_substep > 0.0)) throw std::invalid_argument("substep must be > 0");

    MarkovValueGrid out = integrate(m, grid, terminal, opts.max_substep);
    if (opts.estimate_error) {
        const MarkovValueGrid fine = integrate(m, grid, terminal, 0.5 * opts.max_substep);
        double diff = 0.0;
        for (std::size_t x = 0; x < m.num_states(); ++x)
            diff = std::max(diff, std::abs(out.values.front()[x] - fine.values.front()[x]));
        // Fourth order: err(h) ~ (16/15) |V_h - V_{h/2}|.
        out.error_estimate = diff * 16.0 / 15.0;
    }
    return out;
}

MarkovValueGrid finite_horizon_value(const TimeVaryingModel& m, double horizon, double alpha, const TerminalCost& g,
                                     const TimeGrid& grid, const BackwardOptions& opts) {
    if (std::abs(grid.back() - horizon) > 1e-12 * std::max(1.0, horizon))
        throw std::invalid_argument("finite-horizon grid must end at T");
    const TimeVaryingModel augmented = augment_finite_horizon(m, horizon, alpha, g);
    std::vector<double> terminal(m.num_states());
    for (std::size_t x = 0; x < terminal.size(); ++x) terminal[x] = std::exp(g.g[x]);
    return solve_backward(augmented, grid, terminal, opts);
}

double discounted_truncation_horizon(double max_cost, double alpha, double tail_tol) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("tail tolerance must be > 0");
    if (max_cost <= 0.0) return 0.0;
    const double ratio = alpha * std::log1p(tail_tol) / max_cost;
    if (ratio >= 1.0) return 0.0;
    return -std::log(ratio) / alpha;
}

double discounted_upper_band(double max_cost, double alpha, double t) {
    return std::exp(max_cost * std::exp(-alpha * t) / alpha);
}

DiscountedSolution discounted_value(const CtmdpModel& m, double alpha, double tail_tol, double grid_step,
                                    const BackwardOptions& opts) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("discounted_value: alpha must be > 0");
    if (!(grid_step > 0.0)) throw std::invalid_argument("discounted_value: grid step must be > 0");
    const double c_max = m.max_cost();

    DiscountedSolution out;
    out.augmented = augment_discounted(m, alpha);
    out.truncation_horizon = std::max(discounted_truncation_horizon(c_max, alpha, tail_tol), grid_step);
    out.tail_bound = discounted_upper_band(c_max, alpha, out.truncation_horizon) - 1.0;

    BackwardOptions bopts = opts;
    bopts.max_substep = std::min(opts.max_substep, grid_step);
    bopts.estimate_error = true;
    out.grid = solve_backward(out.augmented, TimeGrid::uniform(out.truncation_horizon, grid_step),
                              std::vector<double>(m.num_states(), 1.0), bopts);
    out.value = out.grid.initial();
    out.integration_error = out.grid.error_estimate.value_or(0.0);
    out.certified_error = out.tail_bound + out.integration_error;
    return out;
}

MarkovPolicyGrid extract_markov_policy(const TimeVaryingModel& m, const MarkovValueGrid& vg) {
    const Rhs rhs(m);
    MarkovPolicyGrid out{vg.times, {}};
    out.action.resize(vg.times.size());
    for (std::size_t k = 0; k < vg.times.size(); ++k) {
        const Side side = k + 1 == vg.times.size() && k > 0 ? Side::left : Side::right;
        auto& row = out.action[k];
        row.assign(m.num_states(), 0);
        for (StateIndex x = 0; x < m.num_states(); ++x) {
            double best = std::numeric_limits<double>::infinity();
            for (ActionIndex a = 0; a < m.num_actions(); ++a) {
                const double b = rhs.bracket(vg.times[k], side, x, a, vg.values[k]);
                if (b < best) {
                    best = b;
                    row[x] = a;
                }
            }
        }
    }
    return out;
}

}  // namespace riskmdp
