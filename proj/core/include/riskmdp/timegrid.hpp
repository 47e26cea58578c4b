#pragma once

#include "riskmdp/embedded.hpp"
#include "riskmdp/model.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace riskmdp {

/// Strictly increasing times 0 = t_0 < t_1 < ... < t_K, K >= 1.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);
    /// 0, step, 2 step, ..., with the last cell shortened to end exactly at horizon.
    static TimeGrid uniform(double horizon, double step);

    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] double back() const noexcept { return times_.back(); }
    [[nodiscard]] double operator[](std::size_t k) const { return times_[k]; }

private:
    std::vector<double> times_;
};

/// V(t_k, x) on a grid; values[k][x].
struct MarkovValueGrid {
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    /// Step-halving estimate of the integration error at t = 0, when requested.
    std::optional<double> error_estimate;

    [[nodiscard]] const std::vector<double>& at(std::size_t k) const { return values[k]; }
    [[nodiscard]] ValueTable initial() const;
};

/// Piecewise-constant-in-time selector; action[k][x] is in force on [t_k, t_{k+1}),
/// and the last row from t_K on.
struct MarkovPolicyGrid {
    std::vector<double> times;
    std::vector<std::vector<ActionIndex>> action;

    [[nodiscard]] ActionIndex operator()(double t, StateIndex x) const;
    /// Times after `t` at which the selector may switch.
    [[nodiscard]] std::vector<double> switch_times_after(double t) const;

    friend bool operator==(const MarkovPolicyGrid&, const MarkovPolicyGrid&) = default;
};

struct BackwardOptions {
    double max_substep = 1e-3;   ///< RK4 substep bound inside each grid cell
    bool estimate_error = false; ///< rerun at half the substep and report the difference
};

/// Thrown when an intermediate value falls below 1 - 1e-9.
class BackwardIntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Integrates dV/dt = -min_a { sum_y V(t,y) q~(y|t,x,a) + (c(t,x,a) - q_(t,x)(a)) V(t,x) }
 * backward from V(t_K, .) = terminal with classic RK4. The minimum over actions
 * is taken inside every stage, substeps never straddle a model breakpoint, and
 * stages at the upper end of a substep use left limits of the model entries.
 * V(t_K, .) equals terminal exactly.
 */
[[nodiscard]] MarkovValueGrid solve_backward(const TimeVaryingModel& m, const TimeGrid& grid,
                                             const std::vector<double>& terminal, const BackwardOptions& opts = {});

/// Finite-horizon value on [0, T] with terminal condition exp(g(x)). The grid must end at T.
[[nodiscard]] MarkovValueGrid finite_horizon_value(const TimeVaryingModel& m, double horizon, double alpha,
                                                   const TerminalCost& g, const TimeGrid& grid,
                                                   const BackwardOptions& opts = {});

struct DiscountedSolution {
    ValueTable value;            ///< L*(x) = V(0, x)
    MarkovValueGrid grid;
    double truncation_horizon = 0.0;
    double tail_bound = 0.0;     ///< exp(c_max exp(-alpha T_h) / alpha) - 1
    double integration_error = 0.0;
    double certified_error = 0.0;  ///< tail_bound + integration_error
    TimeVaryingModel augmented;  ///< the discounted model that was integrated
};

/// Smallest T with exp(c_max exp(-alpha T) / alpha) - 1 <= tail_tol (0 when already satisfied at T = 0).
[[nodiscard]] double discounted_truncation_horizon(double max_cost, double alpha, double tail_tol);

/// exp(c_max exp(-alpha t) / alpha): the upper band on V(t, .) for the discounted problem.
[[nodiscard]] double discounted_upper_band(double max_cost, double alpha, double t);

/**
 * Discounted risk-sensitive value L*(x) = L(0, x). Truncates at T_h from
 * discounted_truncation_horizon with terminal 1, integrates the augmented
 * model backward on a uniform grid of spacing grid_step, and reports the
 * certified error. Throws std::invalid_argument unless alpha > 0.
 */
[[nodiscard]] DiscountedSolution discounted_value(const CtmdpModel& m, double alpha, double tail_tol,
                                                  double grid_step, const BackwardOptions& opts = {});

/// Per (t_k, x) argmin of the optimality bracket, lowest index on ties.
[[nodiscard]] MarkovPolicyGrid extract_markov_policy(const TimeVaryingModel& m, const MarkovValueGrid& vg);

}  // namespace riskmdp
