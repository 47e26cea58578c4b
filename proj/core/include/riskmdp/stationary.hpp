#pragma once

#include "riskmdp/embedded.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace riskmdp {

struct SolveOptions {
    double tol = 1e-12;            ///< bound on the rate-weighted change that stops the iteration
    std::size_t max_iter = 100000;
    double cap = 1e15;             ///< iterates above this are set to +inf and labelled suspected
};

struct IterationRecord {
    double delta = 0.0;            ///< sup-norm change over entries finite in both iterates
    /// max over those entries of max(1, q_x) |change|; bounds the next residual up to the contraction factor
    double weighted_delta = 0.0;
    std::size_t inf_count = 0;
    double elapsed_seconds = 0.0;  ///< since the start of the solve
};

/// When and how a state's value became +inf.
struct InfiniteMark {
    std::size_t iteration = 0;
    bool exact = false;  ///< certified by the closed form or by propagation from exact states; false means capped
};

struct IterationTrace {
    std::vector<IterationRecord> records;  ///< records[n-1] describes V^(n) against V^(n-1)
    std::vector<std::optional<InfiniteMark>> infinite;  ///< per state
    std::size_t iterations = 0;            ///< operator applications performed
    bool converged = false;
};

struct SolveResult {
    ValueTable values;
    IterationTrace trace;
};

/**
 * Monotone value iteration V^(0) = 1, V^(n) = T V^(n-1).
 *
 * Iterates are nondecreasing, so the loop stops once the change over finite
 * entries falls below tol and no new +inf appeared. The change at x is
 * weighted by max(1, largest exit rate at x): the optimality residual at the
 * returned table is (q - c) times the next change, so an unweighted test would
 * leave residuals up to max q times tol. Non-convergence is reported in the
 * trace rather than thrown.
 */
[[nodiscard]] SolveResult value_iteration(const CtmdpModel& m, const SolveOptions& opts = {});

/// Called with (n, V^(n)) after every application, starting at n = 1.
using IterationObserver = std::function<void(std::size_t, const ValueTable&)>;

/// value_iteration that reports every iterate to `observe`.
[[nodiscard]] SolveResult value_iteration(const CtmdpModel& m, const SolveOptions& opts,
                                          const IterationObserver& observe);

/// Monotone iteration of the policy-restricted operator from V = 1; its limit is V(x, f).
[[nodiscard]] SolveResult evaluate_policy(const CtmdpModel& m, const StationaryPolicy& f,
                                          const SolveOptions& opts = {});

/// argmin over a of sum_y q~(y|x,a) V(y) - (q_x(a) - c(x,a)) V(x), lowest index on ties.
/// The argmin is still taken where V(x) = inf, though nothing constrains the action there.
[[nodiscard]] StationaryPolicy extract_policy(const CtmdpModel& m, const ValueTable& v);

/**
 * Optimality-equation bracket used by extract_policy and residual, in signed
 * extended arithmetic (may be -inf or +inf; inf - inf := inf).
 */
[[nodiscard]] double optimality_bracket(ExtReal jump_mass, double exit_rate, double cost_rate, ExtReal value);

/// Per-state min over a of the optimality bracket; nullopt at states with V(x) = inf.
[[nodiscard]] std::vector<std::optional<double>> residual(const CtmdpModel& m, const ValueTable& v);

struct StatePartition {
    std::vector<StateIndex> finite;              ///< the set of states with finite value
    std::vector<StateIndex> infinite_exact;
    std::vector<StateIndex> infinite_suspected;  ///< exceeded the cap without a certificate
};

[[nodiscard]] StatePartition classify_states(const CtmdpModel& m, const ValueTable& v, const IterationTrace& trace);

}  // namespace riskmdp
