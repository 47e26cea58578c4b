#include "riskmdp/stationary.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <span>

namespace riskmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// An action's value is certified infinite when the closed form says so
// outright, or when it leans on a successor that is itself certified.
bool exact_infinite_action(const CtmdpModel& m, StateIndex x, ActionIndex a, const ValueTable& prev,
                           const std::vector<std::optional<InfiniteMark>>& marks) {
    const double q = m.exit_rate(x, a);
    const double c = m.cost(x, a);
    if (q <= c && c > 0.0) return true;
    for (StateIndex y = 0; y < m.num_states(); ++y) {
        if (y == x || m.rate(x, a, y) == 0.0) continue;
        if (prev[y].is_inf() && marks[y] && marks[y]->exact) return true;
    }
    return false;
}

SolveResult monotone_iteration(const CtmdpModel& m, const SolveOptions& opts, const StationaryPolicy* policy,
                               const IterationObserver* observe) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const std::size_t n = m.num_states();

    SolveResult result{ValueTable::ones(n), {}};
    auto& trace = result.trace;
    trace.infinite.assign(n, std::nullopt);

    std::vector<ActionIndex> all_actions(m.num_actions());
    for (ActionIndex a = 0; a < all_actions.size(); ++a) all_actions[a] = a;

    ValueTable next{std::vector<ExtReal>(n)};
    while (trace.iterations < opts.max_iter) {
        const ValueTable& prev = result.values;
        ++trace.iterations;
        double delta = 0.0;
        double weighted = 0.0;
        bool new_infinity = false;
        std::vector<std::optional<InfiniteMark>> marks = trace.infinite;

        for (StateIndex x = 0; x < n; ++x) {
            const ActionIndex single = policy ? (*policy)(x) : 0;
            std::span<const ActionIndex> actions =
                policy ? std::span<const ActionIndex>(&single, 1) : std::span<const ActionIndex>(all_actions);

            ExtReal best = ExtReal::infinity();
            double rate_scale = 1.0;
            for (ActionIndex a : actions) {
                const ExtReal value = action_value(m, x, a, prev);
                if (value < best) best = value;
                rate_scale = std::max(rate_scale, m.exit_rate(x, a));
            }
            bool capped = false;
            if (best.is_finite() && best.value() > opts.cap) {
                best = ExtReal::infinity();
                capped = true;
            }
            next[x] = best;

            if (best.is_inf()) {
                if (!prev[x].is_inf()) {
                    new_infinity = true;
                    bool exact = !capped && std::all_of(actions.begin(), actions.end(), [&](ActionIndex a) {
                        return exact_infinite_action(m, x, a, prev, trace.infinite);
                    });
                    marks[x] = InfiniteMark{trace.iterations, exact};
                }
            } else if (prev[x].is_finite()) {
                const double change = std::abs(best.value() - prev[x].value());
                delta = std::max(delta, change);
                weighted = std::max(weighted, rate_scale * change);
            }
        }

        trace.infinite = std::move(marks);
        std::swap(result.values, next);
        trace.records.push_back({delta, weighted, result.values.infinite_count(),
                                 std::chrono::duration<double>(clock::now() - start).count()});
        if (observe) (*observe)(trace.iterations, result.values);
        if (!new_infinity && weighted < opts.tol) {
            trace.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace

SolveResult value_iteration(const CtmdpModel& m, const SolveOptions& opts) {
    return monotone_iteration(m, opts, nullptr, nullptr);
}

SolveResult value_iteration(const CtmdpModel& m, const SolveOptions& opts, const IterationObserver& observe) {
    return monotone_iteration(m, opts, nullptr, observe ? &observe : nullptr);
}

SolveResult evaluate_policy(const CtmdpModel& m, const StationaryPolicy& f, const SolveOptions& opts) {
    check_policy(m, f);
    return monotone_iteration(m, opts, &f, nullptr);
}

double optimality_bracket(ExtReal jump_mass, double exit_rate, double cost_rate, ExtReal value) {
    const double net = exit_rate - cost_rate;
    double drain = 0.0;  // (q - c) V, with 0 * inf := 0
    if (value.is_inf()) {
        drain = net > 0.0 ? kInf : net < 0.0 ? -kInf : 0.0;
    } else {
        drain = net * value.value();
    }
    if (jump_mass.is_inf()) return kInf;  // covers inf - inf := inf
    return jump_mass.value() - drain;
}

StationaryPolicy extract_policy(const CtmdpModel& m, const ValueTable& v) {
    StationaryPolicy f{std::vector<ActionIndex>(m.num_states(), 0)};
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        double best = kInf;
        bool found = false;
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
            const double b = optimality_bracket(jump_mass(m, x, a, v), m.exit_rate(x, a), m.cost(x, a), v[x]);
            if (!found || b < best) {
                best = b;
                f.action[x] = a;
                found = true;
            }
        }
    }
    return f;
}

std::vector<std::optional<double>> residual(const CtmdpModel& m, const ValueTable& v) {
    std::vector<std::optional<double>> out(m.num_states());
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        if (v[x].is_inf()) continue;
        double best = kInf;
        for (ActionIndex a = 0; a < m.num_actions(); ++a)
            best = std::min(best, optimality_bracket(jump_mass(m, x, a, v), m.exit_rate(x, a), m.cost(x, a), v[x]));
        out[x] = best;
    }
    return out;
}

StatePartition classify_states(const CtmdpModel& m, const ValueTable& v, const IterationTrace& trace) {
    StatePartition out;
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        if (v[x].is_finite()) {
            out.finite.push_back(x);
        } else if (x < trace.infinite.size() && trace.infinite[x] && trace.infinite[x]->exact) {
            out.infinite_exact.push_back(x);
        } else {
            out.infinite_suspected.push_back(x);
        }
    }
    return out;
}

}  // namespace riskmdp
