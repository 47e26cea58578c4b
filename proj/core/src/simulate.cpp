#include "riskmdp/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

namespace riskmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Precomputed per-(x, a) data shared read-only by every trajectory.
struct Entry {
    TimeFunction exit;
    bool constant = false;
    double q = 0.0;
    double c = 0.0;
};

class Plan {
public:
    Plan(const TimeVaryingModel& m, const Policy& policy) : m_(m), policy_(policy) {
        const std::size_t nS = m.num_states();
        const std::size_t nA = m.num_actions();
        if (const auto* f = std::get_if<StationaryPolicy>(&policy_)) {
            if (f->action.size() != nS) throw std::invalid_argument("policy must cover every state");
            for (ActionIndex a : f->action)
                if (a >= nA) throw std::invalid_argument("policy action out of range");
        } else {
            const auto& g = std::get<MarkovPolicyGrid>(policy_);
            if (g.times.empty() || g.times.size() != g.action.size() || g.times.front() != 0.0)
                throw std::invalid_argument("Markov policy grid must start at t=0 with one row per time");
            for (const auto& row : g.action) {
                if (row.size() != nS) throw std::invalid_argument("policy must cover every state");
                for (ActionIndex a : row)
                    if (a >= nA) throw std::invalid_argument("policy action out of range");
            }
        }
        entries_.resize(nS * nA);
        for (StateIndex x = 0; x < nS; ++x) {
            for (ActionIndex a = 0; a < nA; ++a) {
                Entry& e = entries_[x * nA + a];
                e.exit = m.exit_rate_fn(x, a);
                bool constant = e.exit.is_constant() && m.cost_fn(x, a).is_constant();
                for (StateIndex y = 0; y < nS && constant; ++y) constant = m.rate_fn(x, a, y).is_constant();
                e.constant = constant;
                if (constant) {
                    e.q = e.exit.constant_value();
                    e.c = m.cost_fn(x, a).constant_value();
                }
            }
        }
    }

    [[nodiscard]] const TimeVaryingModel& model() const { return m_; }
    [[nodiscard]] const Entry& entry(StateIndex x, ActionIndex a) const {
        return entries_[x * m_.num_actions() + a];
    }

    [[nodiscard]] ActionIndex action(double t, StateIndex x) const {
        if (const auto* f = std::get_if<StationaryPolicy>(&policy_)) return (*f)(x);
        return std::get<MarkovPolicyGrid>(policy_)(t, x);
    }

    // End of the constant-action segment starting at t.
    [[nodiscard]] double segment_end(double t) const {
        if (std::holds_alternative<StationaryPolicy>(policy_)) return kInf;
        const auto& times = std::get<MarkovPolicyGrid>(policy_).times;
        auto it = std::upper_bound(times.begin(), times.end(), t);
        return it == times.end() ? kInf : *it;
    }

    // Every action the policy can use at x, for the reachability scan.
    [[nodiscard]] std::vector<ActionIndex> actions_at(StateIndex x) const {
        if (const auto* f = std::get_if<StationaryPolicy>(&policy_)) return {(*f)(x)};
        std::vector<ActionIndex> out;
        for (const auto& row : std::get<MarkovPolicyGrid>(policy_).action) out.push_back(row[x]);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    const TimeVaryingModel& m_;
    const Policy& policy_;
    std::vector<Entry> entries_;
};

// Jump time from t at state x for exponential target `target`, walking the
// policy's constant-action segments; nullopt if the process never jumps.
struct JumpFound {
    double time;
    ActionIndex action;
};

std::optional<JumpFound> find_jump(const Plan& plan, double t, StateIndex x, double target) {
    double acc = 0.0;
    double s0 = t;
    while (true) {
        const double s1 = plan.segment_end(s0);
        const ActionIndex a = plan.action(s0, x);
        const Entry& e = plan.entry(x, a);
        if (e.constant) {
            if (e.q > 0.0) {
                const double dt = (target - acc) / e.q;
                if (s0 + dt < s1) return JumpFound{s0 + dt, a};
                acc += e.q * (s1 - s0);
            }
        } else {
            const ExtReal mass = e.exit.integral(s0, s1);
            if (mass.is_inf() || acc + mass.value() >= target) {
                if (auto tau = e.exit.invert_integral(s0, target - acc)) return JumpFound{std::min(*tau, s1), a};
                return std::nullopt;
            }
            acc += mass.value();
        }
        if (std::isinf(s1)) return std::nullopt;
        s0 = s1;
    }
}

// Cost integral over [from, to] along the policy's segments at state x.
ExtReal cost_integral(const Plan& plan, StateIndex x, double from, double to) {
    ExtReal total;
    double s0 = from;
    while (s0 < to) {
        const double s1 = std::min(plan.segment_end(s0), to);
        const ActionIndex a = plan.action(s0, x);
        const Entry& e = plan.entry(x, a);
        if (e.constant) {
            if (e.c > 0.0) total += std::isinf(s1) ? ExtReal::infinity() : ExtReal(e.c * (s1 - s0));
        } else {
            total += plan.model().cost_fn(x, a).integral(s0, s1);
        }
        if (total.is_inf() || std::isinf(s1)) break;
        s0 = s1;
    }
    return total;
}

StateIndex draw_successor(const TimeVaryingModel& m, double t, StateIndex x, ActionIndex a, double u) {
    const std::size_t n = m.num_states();
    double total = m.exit_rate(t, x, a);
    bool left = false;
    if (!(total > 0.0) && t > 0.0) {
        total = 0.0;
        for (StateIndex y = 0; y < n; ++y)
            if (y != x) total += m.rate_fn(x, a, y).left_limit(t);
        left = true;
    }
    const double threshold = u * total;
    double cum = 0.0;
    StateIndex last = x;
    for (StateIndex y = 0; y < n; ++y) {
        if (y == x) continue;
        const double r = left ? m.rate_fn(x, a, y).left_limit(t) : m.rate(t, x, y, a);
        if (r <= 0.0) continue;
        cum += r;
        last = y;
        if (cum >= threshold) return y;
    }
    return last;
}

TrajectorySample run_trajectory(const Plan& plan, StateIndex x0, CounterRng& rng, const SimulationOptions& opts,
                                bool record) {
    const TimeVaryingModel& m = plan.model();
    TrajectorySample out;
    double t = 0.0;
    StateIndex x = x0;
    ExtReal exponent;
    while (true) {
        if (record) out.jumps.push_back({t, x, plan.action(t, x)});
        if (out.jump_count >= opts.jump_cap) {
            out.terminated_by = Termination::jump_capped;
            break;
        }
        const double target = -std::log(rng.uniform_open());
        const auto jump = find_jump(plan, t, x, target);
        if (!jump) {
            exponent += cost_integral(plan, x, t, kInf);
            out.terminated_by = Termination::absorbed;
            break;
        }
        if (jump->time > opts.t_max) {
            exponent += cost_integral(plan, x, t, opts.t_max);
            out.terminated_by = Termination::time_truncated;
            break;
        }
        exponent += cost_integral(plan, x, t, jump->time);
        const StateIndex y = draw_successor(m, jump->time, x, jump->action, rng.uniform_open());
        t = jump->time;
        x = y;
        ++out.jump_count;
    }
    out.accumulated_exponent = exponent;
    return out;
}

bool heavy_tail(const Plan& plan, StateIndex x0) {
    const TimeVaryingModel& m = plan.model();
    std::vector<char> seen(m.num_states(), 0);
    std::vector<StateIndex> stack{x0};
    seen[x0] = 1;
    bool flagged = false;
    const std::vector<double> probe_times = [&] {
        std::vector<double> ts{0.0};
        for (double b : m.breakpoints()) ts.push_back(b);
        return ts;
    }();
    while (!stack.empty()) {
        const StateIndex x = stack.back();
        stack.pop_back();
        for (ActionIndex a : plan.actions_at(x)) {
            for (double t : probe_times) {
                const double c = m.cost(t, x, a);
                if (c > 0.0 && c >= 0.5 * m.exit_rate(t, x, a)) flagged = true;
            }
            for (StateIndex y = 0; y < m.num_states(); ++y) {
                if (y == x || seen[y] || m.rate_fn(x, a, y).is_zero()) continue;
                seen[y] = 1;
                stack.push_back(y);
            }
        }
    }
    return flagged;
}

}  // namespace

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::absorbed: return "absorbed";
        case Termination::time_truncated: return "time_truncated";
        case Termination::jump_capped: return "jump_capped";
    }
    return "unknown";
}

ExtReal sample_sojourn(const TimeFunction& rate, double u) {
    if (!(u > 0.0) || !(u <= 1.0)) throw std::invalid_argument("sample_sojourn: u must lie in (0, 1]");
    if (auto t = rate.invert_integral(0.0, -std::log(u))) return ExtReal(*t);
    return ExtReal::infinity();
}

TrajectorySample sample_trajectory(const TimeVaryingModel& m, const Policy& policy, StateIndex x0, CounterRng& rng,
                                   const SimulationOptions& opts) {
    if (x0 >= m.num_states()) throw std::invalid_argument("initial state out of range");
    const Plan plan(m, policy);
    return run_trajectory(plan, x0, rng, opts, opts.record_jumps);
}

unsigned resolve_worker_count(unsigned requested) {
    unsigned workers = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RISKMDP_THREADS")) {
        unsigned cap = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), cap);
        if (ec == std::errc{} && cap > 0) workers = std::min(workers, cap);
    }
    return workers;
}

McEstimate estimate_utility(const TimeVaryingModel& m, const Policy& policy, StateIndex x0, std::size_t n,
                            std::uint64_t seed, const SimulationOptions& opts) {
    if (n < 2) throw std::invalid_argument("estimate_utility: need at least two samples");
    if (x0 >= m.num_states()) throw std::invalid_argument("initial state out of range");
    const Plan plan(m, policy);

    std::vector<double> exponents(n);
    std::vector<unsigned char> termination(n);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng(seed, i);
            const TrajectorySample s = run_trajectory(plan, x0, rng, opts, false);
            exponents[i] = s.accumulated_exponent.to_double();
            termination[i] = static_cast<unsigned char>(s.terminated_by);
        }
    };

    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_worker_count(opts.workers), n));
    if (workers <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    McEstimate est;
    est.n_samples = n;
    est.seed = seed;
    est.heavy_tail_warning = heavy_tail(plan, x0);

    double sum = 0.0;
    bool infinite = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isinf(exponents[i])) est.divergent = true;
        const double u = std::exp(exponents[i]);
        if (std::isinf(u)) infinite = true;
        sum += u;
        const auto term = static_cast<Termination>(termination[i]);
        if (term == Termination::time_truncated) ++est.time_truncated;
        if (term == Termination::jump_capped) ++est.jump_capped;
    }
    est.truncation_fraction = static_cast<double>(est.time_truncated + est.jump_capped) / static_cast<double>(n);
    if (infinite || std::isinf(sum)) {
        est.mean = ExtReal::infinity();
        est.std_error = ExtReal::infinity();
        return est;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::exp(exponents[i]) - mean;
        ss += d * d;
    }
    est.mean = ExtReal(mean);
    est.std_error = ExtReal(std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)));
    return est;
}

McEstimate estimate_utility(const CtmdpModel& m, const StationaryPolicy& policy, StateIndex x0, std::size_t n,
                            std::uint64_t seed, const SimulationOptions& opts) {
    return estimate_utility(TimeVaryingModel::from_homogeneous(m), Policy{policy}, x0, n, seed, opts);
}

}  // namespace riskmdp
