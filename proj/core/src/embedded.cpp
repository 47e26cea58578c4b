#include "riskmdp/embedded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace riskmdp {

std::size_t ValueTable::infinite_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const ExtReal& e) { return e.is_inf(); }));
}

ExtReal sojourn_value(double exit_rate, double cost_rate, ExtReal jump_mass) {
    if (!std::isfinite(exit_rate) || exit_rate < 0.0 || !std::isfinite(cost_rate) || cost_rate < 0.0)
        throw std::invalid_argument("sojourn_value: rates must be finite and >= 0");
    if (exit_rate == 0.0) {
        if (!jump_mass.is_zero())
            throw std::invalid_argument("sojourn_value: positive jump mass with zero exit rate");
        // Never jumps: only the no-jump term exp(-0) exp(c * inf) remains.
        return no_jump_term(ExtReal(0.0), xmul(ExtReal(cost_rate), ExtReal::infinity()));
    }
    // q > 0: the no-jump term vanishes (total rate is infinite).
    if (exit_rate <= cost_rate) return jump_mass.is_zero() ? ExtReal{} : ExtReal::infinity();
    return xdiv(jump_mass, ExtReal(exit_rate - cost_rate));
}

ExtReal jump_mass(const CtmdpModel& m, StateIndex x, ActionIndex a, const ValueTable& v) {
    ExtReal mass;
    for (StateIndex y = 0; y < m.num_states(); ++y) {
        if (y == x) continue;
        const double r = m.rate(x, a, y);
        if (r == 0.0) continue;
        mass += xmul(ExtReal(r), v[y]);
    }
    return mass;
}

ExtReal action_value(const CtmdpModel& m, StateIndex x, ActionIndex a, const ValueTable& v) {
    return sojourn_value(m.exit_rate(x, a), m.cost(x, a), jump_mass(m, x, a, v));
}

ValueTable bellman_apply(const CtmdpModel& m, const ValueTable& v) {
    ValueTable out(std::vector<ExtReal>(m.num_states(), ExtReal::infinity()));
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
            const ExtReal value = action_value(m, x, a, v);
            if (value < out[x]) out[x] = value;
        }
    }
    return out;
}

void check_policy(const CtmdpModel& m, const StationaryPolicy& f) {
    if (f.action.size() != m.num_states())
        throw std::invalid_argument("policy must assign an action to each of the " + std::to_string(m.num_states()) +
                                    " states");
    for (StateIndex x = 0; x < f.action.size(); ++x)
        if (f.action[x] >= m.num_actions())
            throw std::invalid_argument("policy action out of range at state '" + m.states()[x] + "'");
}

ValueTable bellman_apply_policy(const CtmdpModel& m, const StationaryPolicy& f, const ValueTable& v) {
    check_policy(m, f);
    ValueTable out(std::vector<ExtReal>(m.num_states()));
    for (StateIndex x = 0; x < m.num_states(); ++x) out[x] = action_value(m, x, f(x), v);
    return out;
}

}  // namespace riskmdp
