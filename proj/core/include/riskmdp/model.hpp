#pragma once

#include "riskmdp/time_function.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace riskmdp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/**
 * Finite homogeneous continuous-time model.
 *
 * Rates are the off-diagonal jump intensities q~(y|x,a); the exit rate q_x(a)
 * is their row sum, so the generator is conservative by construction. The
 * diagonal entry is stored but must stay zero (validate() reports it).
 * The cemetery state is implicit and carries zero cost.
 */
class CtmdpModel {
public:
    CtmdpModel() = default;
    CtmdpModel(std::vector<std::string> states, std::vector<std::string> actions);

    [[nodiscard]] std::size_t num_states() const noexcept { return states_.size(); }
    [[nodiscard]] std::size_t num_actions() const noexcept { return actions_.size(); }
    [[nodiscard]] const std::vector<std::string>& states() const noexcept { return states_; }
    [[nodiscard]] const std::vector<std::string>& actions() const noexcept { return actions_; }
    [[nodiscard]] std::optional<StateIndex> state_index(std::string_view label) const;
    [[nodiscard]] std::optional<ActionIndex> action_index(std::string_view label) const;

    [[nodiscard]] double rate(StateIndex x, ActionIndex a, StateIndex y) const { return rates_[rate_slot(x, a, y)]; }
    [[nodiscard]] double cost(StateIndex x, ActionIndex a) const { return costs_[x * num_actions() + a]; }
    /// q_x(a) = sum over y != x of q~(y|x,a).
    [[nodiscard]] double exit_rate(StateIndex x, ActionIndex a) const;
    /// max over actions of the exit rate.
    [[nodiscard]] double max_exit_rate(StateIndex x) const;
    [[nodiscard]] double max_cost() const;

    void set_rate(StateIndex x, ActionIndex a, StateIndex y, double value);
    void set_cost(StateIndex x, ActionIndex a, double value);

    friend bool operator==(const CtmdpModel&, const CtmdpModel&) = default;

private:
    [[nodiscard]] std::size_t rate_slot(StateIndex x, ActionIndex a, StateIndex y) const {
        return (x * num_actions() + a) * num_states() + y;
    }

    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    std::vector<double> rates_;
    std::vector<double> costs_;
};

/// Nonhomogeneous model: every rate and cost entry is a TimeFunction.
/// The drift is the time shift (t, x) -> (t + s, x).
class TimeVaryingModel {
public:
    TimeVaryingModel() = default;
    TimeVaryingModel(std::vector<std::string> states, std::vector<std::string> actions);
    static TimeVaryingModel from_homogeneous(const CtmdpModel& m);

    [[nodiscard]] std::size_t num_states() const noexcept { return states_.size(); }
    [[nodiscard]] std::size_t num_actions() const noexcept { return actions_.size(); }
    [[nodiscard]] const std::vector<std::string>& states() const noexcept { return states_; }
    [[nodiscard]] const std::vector<std::string>& actions() const noexcept { return actions_; }
    [[nodiscard]] std::optional<StateIndex> state_index(std::string_view label) const;

    [[nodiscard]] const TimeFunction& rate_fn(StateIndex x, ActionIndex a, StateIndex y) const {
        return rates_[rate_slot(x, a, y)];
    }
    [[nodiscard]] const TimeFunction& cost_fn(StateIndex x, ActionIndex a) const { return costs_[x * num_actions() + a]; }
    /// Sum of the off-diagonal rate functions.
    [[nodiscard]] TimeFunction exit_rate_fn(StateIndex x, ActionIndex a) const;

    [[nodiscard]] double rate(double t, StateIndex x, StateIndex y, ActionIndex a) const { return rate_fn(x, a, y)(t); }
    [[nodiscard]] double cost(double t, StateIndex x, ActionIndex a) const { return cost_fn(x, a)(t); }
    [[nodiscard]] double exit_rate(double t, StateIndex x, ActionIndex a) const;

    /// All piece starts (> 0) across every entry, sorted and unique.
    [[nodiscard]] std::vector<double> breakpoints() const;
    /// True when every entry is a constant function.
    [[nodiscard]] bool is_homogeneous() const;
    /// The homogeneous model with the same (constant) entries; throws if !is_homogeneous().
    [[nodiscard]] CtmdpModel to_homogeneous() const;

    [[nodiscard]] std::optional<double> horizon_hint() const noexcept { return horizon_hint_; }
    void set_horizon_hint(std::optional<double> t) { horizon_hint_ = t; }

    void set_rate(StateIndex x, ActionIndex a, StateIndex y, TimeFunction f);
    void set_cost(StateIndex x, ActionIndex a, TimeFunction f);

    friend bool operator==(const TimeVaryingModel&, const TimeVaryingModel&) = default;

private:
    [[nodiscard]] std::size_t rate_slot(StateIndex x, ActionIndex a, StateIndex y) const {
        return (x * num_actions() + a) * num_states() + y;
    }

    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    std::vector<TimeFunction> rates_;
    std::vector<TimeFunction> costs_;
    std::optional<double> horizon_hint_;
};

/// Terminal cost g(x) >= 0 for the finite-horizon problem.
struct TerminalCost {
    std::vector<double> g;

    friend bool operator==(const TerminalCost&, const TerminalCost&) = default;
};

enum class ModelKind { homogeneous, time_varying, finite_horizon, discounted };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
[[nodiscard]] std::optional<ModelKind> parse_model_kind(std::string_view text) noexcept;

/// A model as loaded from disk: one of the four problem kinds with its parameters.
struct ModelDoc {
    ModelKind kind = ModelKind::homogeneous;
    std::string name;
    std::string description;
    std::variant<CtmdpModel, TimeVaryingModel> model;
    std::optional<double> alpha;
    std::optional<double> horizon;
    std::optional<TerminalCost> terminal;

    /// The model as time-varying (homogeneous models are lifted).
    [[nodiscard]] TimeVaryingModel time_varying() const;
    [[nodiscard]] const std::vector<std::string>& states() const;

    friend bool operator==(const ModelDoc&, const ModelDoc&) = default;
};

struct Violation {
    std::string path;     ///< e.g. "rates/x1/a0/x2" or "costs/x0/a1"
    std::string message;  ///< includes the offending time when relevant
};

[[nodiscard]] std::vector<Violation> validate_model(const CtmdpModel& m);
[[nodiscard]] std::vector<Violation> validate_model(const TimeVaryingModel& m);
[[nodiscard]] std::vector<Violation> validate_model(const ModelDoc& doc);

/// Rates unchanged, cost(t,x,a) = exp(-alpha t) c(x,a). Throws std::invalid_argument unless alpha > 0.
[[nodiscard]] TimeVaryingModel augment_discounted(const CtmdpModel& m, double alpha);

/**
 * Finite-horizon reformulation on [0, horizon]: rates vanish for t >= horizon,
 * cost is exp(-alpha t) c(t,x,a) before the horizon and exp(-(t - horizon)) g(x)
 * after it, so the post-horizon exponent integrates to exactly g(x).
 * Throws std::invalid_argument unless horizon > 0 and alpha >= 0.
 */
[[nodiscard]] TimeVaryingModel augment_finite_horizon(const TimeVaryingModel& m, double horizon, double alpha,
                                                      const TerminalCost& g);

/// A point (t, x) of the augmented state space.
struct TimeState {
    double t = 0.0;
    StateIndex x = 0;

    friend bool operator==(const TimeState&, const TimeState&) = default;
};

/// The time-shift drift (t, x) -> (t + s, x).
[[nodiscard]] constexpr TimeState drift(TimeState p, double s) noexcept { return {p.t + s, p.x}; }

}  // namespace riskmdp
