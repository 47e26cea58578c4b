#include "riskmdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace riskmdp {

namespace {

template <class Labels>
std::optional<std::size_t> find_label(const Labels& labels, std::string_view label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
}

void check_labels(const std::vector<std::string>& labels, const char* what, std::vector<Violation>& out) {
    if (labels.empty()) out.push_back({what, std::string("at least one entry required in ") + what});
    std::set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second) out.push_back({what, "duplicate label '" + l + "'"});
}

std::string number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- CtmdpModel

CtmdpModel::CtmdpModel(std::vector<std::string> states, std::vector<std::string> actions)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      rates_(states_.size() * actions_.size() * states_.size(), 0.0),
      costs_(states_.size() * actions_.size(), 0.0) {}

std::optional<StateIndex> CtmdpModel::state_index(std::string_view label) const { return find_label(states_, label); }
std::optional<ActionIndex> CtmdpModel::action_index(std::string_view label) const {
    return find_label(actions_, label);
}

double CtmdpModel::exit_rate(StateIndex x, ActionIndex a) const {
    double q = 0.0;
    for (StateIndex y = 0; y < num_states(); ++y)
        if (y != x) q += rate(x, a, y);
    return q;
}

double CtmdpModel::max_exit_rate(StateIndex x) const {
    double q = 0.0;
    for (ActionIndex a = 0; a < num_actions(); ++a) q = std::max(q, exit_rate(x, a));
    return q;
}

double CtmdpModel::max_cost() const {
    double c = 0.0;
    for (double v : costs_) c = std::max(c, v);
    return c;
}

void CtmdpModel::set_rate(StateIndex x, ActionIndex a, StateIndex y, double value) {
    rates_.at(rate_slot(x, a, y)) = value;
}

void CtmdpModel::set_cost(StateIndex x, ActionIndex a, double value) { costs_.at(x * num_actions() + a) = value; }

// ---------------------------------------------------------- TimeVaryingModel

TimeVaryingModel::TimeVaryingModel(std::vector<std::string> states, std::vector<std::string> actions)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      rates_(states_.size() * actions_.size() * states_.size()),
      costs_(states_.size() * actions_.size()) {}

TimeVaryingModel TimeVaryingModel::from_homogeneous(const CtmdpModel& m) {
    TimeVaryingModel out(m.states(), m.actions());
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
            out.set_cost(x, a, TimeFunction::constant(m.cost(x, a)));
            for (StateIndex y = 0; y < m.num_states(); ++y)
                out.set_rate(x, a, y, TimeFunction::constant(m.rate(x, a, y)));
        }
    }
    return out;
}

std::optional<StateIndex> TimeVaryingModel::state_index(std::string_view label) const {
    return find_label(states_, label);
}

TimeFunction TimeVaryingModel::exit_rate_fn(StateIndex x, ActionIndex a) const {
    TimeFunction sum;
    for (StateIndex y = 0; y < num_states(); ++y)
        if (y != x && !rate_fn(x, a, y).is_zero()) sum = sum + rate_fn(x, a, y);
    return sum;
}

double TimeVaryingModel::exit_rate(double t, StateIndex x, ActionIndex a) const {
    double q = 0.0;
    for (StateIndex y = 0; y < num_states(); ++y)
        if (y != x) q += rate(t, x, y, a);
    return q;
}

std::vector<double> TimeVaryingModel::breakpoints() const {
    std::vector<double> out;
    for (const auto& f : rates_)
        for (double b : f.breakpoints()) out.push_back(b);
    for (const auto& f : costs_)
        for (double b : f.breakpoints()) out.push_back(b);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool TimeVaryingModel::is_homogeneous() const {
    auto constant = [](const TimeFunction& f) { return f.is_constant(); };
    return std::all_of(rates_.begin(), rates_.end(), constant) && std::all_of(costs_.begin(), costs_.end(), constant);
}

CtmdpModel TimeVaryingModel::to_homogeneous() const {
    if (!is_homogeneous()) throw std::logic_error("model has time-dependent entries");
    CtmdpModel out(states_, actions_);
    for (StateIndex x = 0; x < num_states(); ++x) {
        for (ActionIndex a = 0; a < num_actions(); ++a) {
            out.set_cost(x, a, cost_fn(x, a).constant_value());
            for (StateIndex y = 0; y < num_states(); ++y) out.set_rate(x, a, y, rate_fn(x, a, y).constant_value());
        }
    }
    return out;
}

void TimeVaryingModel::set_rate(StateIndex x, ActionIndex a, StateIndex y, TimeFunction f) {
    rates_.at(rate_slot(x, a, y)) = std::move(f);
}

void TimeVaryingModel::set_cost(StateIndex x, ActionIndex a, TimeFunction f) {
    costs_.at(x * num_actions() + a) = std::move(f);
}

// ------------------------------------------------------------------ ModelDoc

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::homogeneous: return "homogeneous";
        case ModelKind::time_varying: return "time-varying";
        case ModelKind::finite_horizon: return "finite-horizon";
        case ModelKind::discounted: return "discounted";
    }
    return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) noexcept {
    for (auto k : {ModelKind::homogeneous, ModelKind::time_varying, ModelKind::finite_horizon, ModelKind::discounted})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

TimeVaryingModel ModelDoc::time_varying() const {
    if (const auto* h = std::get_if<CtmdpModel>(&model)) return TimeVaryingModel::from_homogeneous(*h);
    return std::get<TimeVaryingModel>(model);
}

const std::vector<std::string>& ModelDoc::states() const {
    return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.states(); }, model);
}

// ---------------------------------------------------------------- validation

std::vector<Violation> validate_model(const CtmdpModel& m) {
    std::vector<Violation> out;
    check_labels(m.states(), "states", out);
    check_labels(m.actions(), "actions", out);
    const auto& S = m.states();
    const auto& A = m.actions();
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
            const double c = m.cost(x, a);
            if (!std::isfinite(c) || c < 0.0)
                out.push_back({"costs/" + S[x] + "/" + A[a], "cost rate must be finite and >= 0, got " + number(c)});
            for (StateIndex y = 0; y < m.num_states(); ++y) {
                const double r = m.rate(x, a, y);
                const std::string path = "rates/" + S[x] + "/" + A[a] + "/" + S[y];
                if (y == x) {
                    if (r != 0.0)
                        out.push_back({path, "self-transition rate must be omitted; exit rate is the row sum"});
                } else if (!std::isfinite(r) || r < 0.0) {
                    out.push_back({path, "transition rate must be finite and >= 0, got " + number(r)});
                }
            }
        }
    }
    return out;
}

std::vector<Violation> validate_model(const TimeVaryingModel& m) {
    std::vector<Violation> out;
    check_labels(m.states(), "states", out);
    check_labels(m.actions(), "actions", out);
    const auto& S = m.states();
    const auto& A = m.actions();
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
            if (auto t = m.cost_fn(x, a).find_negative())
                out.push_back({"costs/" + S[x] + "/" + A[a], "cost rate negative at t=" + number(*t)});
            for (StateIndex y = 0; y < m.num_states(); ++y) {
                const std::string path = "rates/" + S[x] + "/" + A[a] + "/" + S[y];
                const TimeFunction& f = m.rate_fn(x, a, y);
                if (y == x) {
                    if (!f.is_zero()) out.push_back({path, "self-transition rate must be omitted"});
                } else if (auto t = f.find_negative()) {
                    out.push_back({path, "transition rate negative at t=" + number(*t)});
                }
            }
        }
    }
    if (auto h = m.horizon_hint(); h && !(*h > 0.0)) out.push_back({"T", "horizon hint must be > 0"});
    return out;
}

std::vector<Violation> validate_model(const ModelDoc& doc) {
    std::vector<Violation> out = std::visit([](const auto& m) { return validate_model(m); }, doc.model);
    const bool homogeneous_payload = std::holds_alternative<CtmdpModel>(doc.model);
    if ((doc.kind == ModelKind::homogeneous || doc.kind == ModelKind::discounted) && !homogeneous_payload)
        out.push_back({"kind", std::string(to_string(doc.kind)) + " models must have time-constant entries"});
    if (doc.alpha && (!std::isfinite(*doc.alpha) || *doc.alpha < 0.0))
        out.push_back({"alpha", "discount rate must be finite and >= 0"});
    if (doc.kind == ModelKind::discounted && !(doc.alpha && *doc.alpha > 0.0))
        out.push_back({"alpha", "discounted models require alpha > 0"});
    if (doc.kind == ModelKind::finite_horizon && !(doc.horizon && std::isfinite(*doc.horizon) && *doc.horizon > 0.0))
        out.push_back({"T", "finite-horizon models require a finite T > 0"});
    if (doc.terminal) {
        const auto& S = doc.states();
        if (doc.terminal->g.size() != S.size()) {
            out.push_back({"terminal_g", "terminal cost must have one entry per state"});
        } else {
            for (std::size_t x = 0; x < S.size(); ++x) {
                const double g = doc.terminal->g[x];
                if (!std::isfinite(g) || g < 0.0)
                    out.push_back({"terminal_g/" + S[x], "terminal cost must be finite and >= 0, got " + number(g)});
            }
        }
    }
    return out;
}

// -------------------------------------------------------------- reformulations

TimeVaryingModel augment_discounted(const CtmdpModel& m, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("augment_discounted: alpha must be > 0");
    TimeVaryingModel out = TimeVaryingModel::from_homogeneous(m);
    for (StateIndex x = 0; x < m.num_states(); ++x)
        for (ActionIndex a = 0; a < m.num_actions(); ++a)
            out.set_cost(x, a, TimeFunction::constant(m.cost(x, a)).discounted(alpha));
    return out;
}

TimeVaryingModel augment_finite_horizon(const TimeVaryingModel& m, double horizon, double alpha,
                                        const TerminalCost& g) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("augment_finite_horizon: T must be finite and > 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("augment_finite_horizon: alpha must be finite and >= 0");
    if (g.g.size() != m.num_states()) throw std::invalid_argument("augment_finite_horizon: terminal cost size mismatch");

    TimeVaryingModel out(m.states(), m.actions());
    for (StateIndex x = 0; x < m.num_states(); ++x) {
        if (!(g.g[x] >= 0.0)) throw std::invalid_argument("augment_finite_horizon: terminal cost must be >= 0");
        TimeFunction tail;
        if (g.g[x] != 0.0) tail = TimeFunction({TimePiece{0.0, {ExpPolyTerm{1.0, {g.g[x]}}}}});
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
            out.set_cost(x, a, m.cost_fn(x, a).discounted(alpha).spliced(horizon, tail));
            for (StateIndex y = 0; y < m.num_states(); ++y) out.set_rate(x, a, y, m.rate_fn(x, a, y).truncated(horizon));
        }
    }
    out.set_horizon_hint(horizon);
    return out;
}

}  // namespace riskmdp
