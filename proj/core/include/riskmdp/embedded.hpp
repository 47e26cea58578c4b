#pragma once

#include "riskmdp/ext_real.hpp"
#include "riskmdp/model.hpp"

#include <cstddef>
#include <vector>

namespace riskmdp {

/// Utility values over the states of a model; every entry is >= 1.
struct ValueTable {
    std::vector<ExtReal> v;

    ValueTable() = default;
    explicit ValueTable(std::vector<ExtReal> values) : v(std::move(values)) {}
    static ValueTable ones(std::size_t n) { return ValueTable(std::vector<ExtReal>(n, ExtReal(1.0))); }

    [[nodiscard]] std::size_t size() const noexcept { return v.size(); }
    [[nodiscard]] const ExtReal& operator[](StateIndex x) const { return v[x]; }
    [[nodiscard]] ExtReal& operator[](StateIndex x) { return v[x]; }
    [[nodiscard]] std::size_t infinite_count() const noexcept;

    friend bool operator==(const ValueTable&, const ValueTable&) = default;
};

/// A deterministic stationary selector f: S -> A.
struct StationaryPolicy {
    std::vector<ActionIndex> action;

    [[nodiscard]] ActionIndex operator()(StateIndex x) const { return action.at(x); }

    friend bool operator==(const StationaryPolicy&, const StationaryPolicy&) = default;
};

/**
 * Value of one sojourn with constant exit rate q and cost rate c, followed by
 * a jump whose continuation mass is jump_mass = sum_y q~(y) V(y):
 *
 *     int_0^inf exp(-(q - c) t) jump_mass dt + exp(-int q) exp(int c).
 *
 * Closed form: 1 for q = c = 0; inf for q = 0 < c; inf for 0 < q <= c with
 * positive jump mass; jump_mass / (q - c) for q > c.
 * Throws std::invalid_argument for q = 0 with positive jump mass, or for
 * negative/non-finite q, c.
 */
[[nodiscard]] ExtReal sojourn_value(double exit_rate, double cost_rate, ExtReal jump_mass);

/// sum over y != x of q~(y|x,a) V(y), with 0 * inf := 0.
[[nodiscard]] ExtReal jump_mass(const CtmdpModel& m, StateIndex x, ActionIndex a, const ValueTable& v);

/// sojourn_value at (x, a) against V.
[[nodiscard]] ExtReal action_value(const CtmdpModel& m, StateIndex x, ActionIndex a, const ValueTable& v);

/// (TV)(x) = min over a of action_value(m, x, a, V). Ties go to the lowest action index.
[[nodiscard]] ValueTable bellman_apply(const CtmdpModel& m, const ValueTable& v);

/// The operator restricted to the selector f. Throws std::invalid_argument on an out-of-range action.
[[nodiscard]] ValueTable bellman_apply_policy(const CtmdpModel& m, const StationaryPolicy& f, const ValueTable& v);

/// Throws std::invalid_argument unless f is total on m's states with in-range actions.
void check_policy(const CtmdpModel& m, const StationaryPolicy& f);

}  // namespace riskmdp
