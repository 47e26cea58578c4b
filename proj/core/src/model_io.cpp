#include "riskmdp/model_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace riskmdp {

using nlohmann::json;

namespace {

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "model violates " << violations.size() << " invariant(s):";
    for (const auto& v : violations) os << "\n  " << v.path << ": " << v.message;
    return os.str();
}

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) schema_fail(path.empty() ? key : path + "/" + key, "required field missing");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) schema_fail(path, "expected a number");
    return j.get<double>();
}

std::vector<std::string> as_labels(const json& j, const std::string& path) {
    if (!j.is_array()) schema_fail(path, "expected an array of labels");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) schema_fail(path + "/" + std::to_string(i), "expected a string label");
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

template <class Lookup>
std::size_t resolve(const Lookup& lookup, const std::string& label, const std::string& path, const char* what) {
    auto idx = lookup(label);
    if (!idx) schema_fail(path, std::string("unknown ") + what + " '" + label + "'");
    return *idx;
}

const json& as_object(const json& j, const std::string& path) {
    if (!j.is_object()) schema_fail(path, "expected an object");
    return j;
}

ExpPolyTerm term_from_json(const json& j, const std::string& path) {
    as_object(j, path);
    ExpPolyTerm term;
    const json& coeffs = require(j, "coeffs", path);
    if (!coeffs.is_array()) schema_fail(path + "/coeffs", "expected an array of numbers");
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        term.coeffs.push_back(as_number(coeffs[k], path + "/coeffs/" + std::to_string(k)));
    if (auto it = j.find("decay"); it != j.end()) term.decay = as_number(*it, path + "/decay");
    return term;
}

json term_to_json(const ExpPolyTerm& term) {
    json j;
    j["coeffs"] = term.coeffs;
    if (term.decay != 0.0) j["decay"] = term.decay;
    return j;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

InvariantError::InvariantError(std::vector<Violation> violations)
    : ModelLoadError(describe(violations)), violations_(std::move(violations)) {}

void to_json(json& j, const ExtReal& x) {
    if (x.is_inf()) {
        j = "inf";
    } else {
        j = x.value();
    }
}

void from_json(const json& j, ExtReal& x) {
    if (j.is_string() && j.get<std::string>() == "inf") {
        x = ExtReal::infinity();
    } else if (j.is_number()) {
        x = ExtReal(j.get<double>());
    } else {
        throw SchemaError("expected a nonnegative number or \"inf\"");
    }
}

TimeFunction time_function_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return TimeFunction::constant(j.get<double>());
    if (!j.is_object()) schema_fail(path, "expected a number or a {\"time_pieces\": [...]} object");
    const json& pieces_j = require(j, "time_pieces", path);
    if (!pieces_j.is_array() || pieces_j.empty()) schema_fail(path + "/time_pieces", "expected a nonempty array");
    std::vector<TimePiece> pieces;
    double start = 0.0;
    for (std::size_t i = 0; i < pieces_j.size(); ++i) {
        const std::string ppath = path + "/time_pieces/" + std::to_string(i);
        const json& p = as_object(pieces_j[i], ppath);
        TimePiece piece{start, {}};
        if (auto it = p.find("terms"); it != p.end()) {
            if (!it->is_array()) schema_fail(ppath + "/terms", "expected an array");
            for (std::size_t k = 0; k < it->size(); ++k) {
                ExpPolyTerm term = term_from_json((*it)[k], ppath + "/terms/" + std::to_string(k));
                if (!term.coeffs.empty()) piece.terms.push_back(std::move(term));
            }
        } else {
            ExpPolyTerm term = term_from_json(p, ppath);
            if (!term.coeffs.empty()) piece.terms.push_back(std::move(term));
        }
        const bool last = i + 1 == pieces_j.size();
        auto until = p.find("until");
        if (!last) {
            if (until == p.end()) schema_fail(ppath + "/until", "required on every piece but the last");
            const double next = as_number(*until, ppath + "/until");
            if (!(next > start) || !std::isfinite(next))
                schema_fail(ppath + "/until", "breakpoints must be finite and strictly increasing");
            pieces.push_back(std::move(piece));
            start = next;
        } else {
            if (until != p.end()) schema_fail(ppath + "/until", "the last piece extends to infinity; omit \"until\"");
            pieces.push_back(std::move(piece));
        }
    }
    try {
        return TimeFunction(std::move(pieces));
    } catch (const std::invalid_argument& e) {
        schema_fail(path, e.what());
    }
}

json time_function_to_json(const TimeFunction& f) {
    if (f.is_zero() && f.pieces().size() == 1 && f.pieces().front().terms.empty()) return 0.0;
    if (f.is_constant() && f.pieces().front().terms.size() == 1 && f.pieces().front().terms.front().coeffs.size() == 1)
        return f.constant_value();
    json pieces = json::array();
    const auto& ps = f.pieces();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        json p;
        if (ps[i].terms.size() == 1) {
            p = term_to_json(ps[i].terms.front());
        } else if (ps[i].terms.empty()) {
            p["coeffs"] = json::array();
        } else {
            p["terms"] = json::array();
            for (const auto& t : ps[i].terms) p["terms"].push_back(term_to_json(t));
        }
        if (i + 1 < ps.size()) p["until"] = ps[i + 1].start;
        pieces.push_back(std::move(p));
    }
    return json{{"time_pieces", std::move(pieces)}};
}

ModelDoc model_from_json(const json& j) {
    as_object(j, "(root)");
    const json& kind_j = require(j, "kind", "");
    if (!kind_j.is_string()) schema_fail("kind", "expected a string");
    const auto kind = parse_model_kind(kind_j.get<std::string>());
    if (!kind) schema_fail("kind", "unknown kind '" + kind_j.get<std::string>() + "'");

    ModelDoc doc;
    doc.kind = *kind;
    if (auto it = j.find("name"); it != j.end()) {
        if (!it->is_string()) schema_fail("name", "expected a string");
        doc.name = it->get<std::string>();
    }
    if (auto it = j.find("description"); it != j.end()) {
        if (!it->is_string()) schema_fail("description", "expected a string");
        doc.description = it->get<std::string>();
    }

    TimeVaryingModel tv(as_labels(require(j, "states", ""), "states"), as_labels(require(j, "actions", ""), "actions"));
    auto state_of = [&](const std::string& l) { return tv.state_index(l); };
    auto action_of = [&](const std::string& l) -> std::optional<std::size_t> {
        const auto& A = tv.actions();
        for (std::size_t a = 0; a < A.size(); ++a)
            if (A[a] == l) return a;
        return std::nullopt;
    };

    if (auto it = j.find("rates"); it != j.end()) {
        for (const auto& [xl, by_action] : as_object(*it, "rates").items()) {
            const std::string xpath = "rates/" + xl;
            const auto x = resolve(state_of, xl, xpath, "state");
            for (const auto& [al, by_target] : as_object(by_action, xpath).items()) {
                const std::string apath = xpath + "/" + al;
                const auto a = resolve(action_of, al, apath, "action");
                for (const auto& [yl, entry] : as_object(by_target, apath).items()) {
                    const std::string ypath = apath + "/" + yl;
                    const auto y = resolve(state_of, yl, ypath, "state");
                    tv.set_rate(x, a, y, time_function_from_json(entry, ypath));
                }
            }
        }
    }
    if (auto it = j.find("costs"); it != j.end()) {
        for (const auto& [xl, by_action] : as_object(*it, "costs").items()) {
            const std::string xpath = "costs/" + xl;
            const auto x = resolve(state_of, xl, xpath, "state");
            for (const auto& [al, entry] : as_object(by_action, xpath).items()) {
                const std::string apath = xpath + "/" + al;
                tv.set_cost(x, resolve(action_of, al, apath, "action"), time_function_from_json(entry, apath));
            }
        }
    }
    if (auto it = j.find("alpha"); it != j.end()) doc.alpha = as_number(*it, "alpha");
    if (auto it = j.find("T"); it != j.end()) doc.horizon = as_number(*it, "T");
    if (auto it = j.find("terminal_g"); it != j.end()) {
        TerminalCost g{std::vector<double>(tv.num_states(), 0.0)};
        for (const auto& [xl, v] : as_object(*it, "terminal_g").items())
            g.g[resolve(state_of, xl, "terminal_g/" + xl, "state")] = as_number(v, "terminal_g/" + xl);
        doc.terminal = std::move(g);
    }

    const bool wants_homogeneous = doc.kind == ModelKind::homogeneous || doc.kind == ModelKind::discounted;
    if (wants_homogeneous && tv.is_homogeneous()) {
        doc.model = tv.to_homogeneous();
    } else {
        doc.model = std::move(tv);
    }

    if (auto violations = validate_model(doc); !violations.empty()) throw InvariantError(std::move(violations));
    return doc;
}

ModelDoc parse_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + e.what());
    }
    return model_from_json(j);
}

ModelDoc load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

json model_to_json(const ModelDoc& doc) {
    json j;
    j["kind"] = std::string(to_string(doc.kind));
    if (!doc.name.empty()) j["name"] = doc.name;
    if (!doc.description.empty()) j["description"] = doc.description;
    const TimeVaryingModel tv = doc.time_varying();
    j["states"] = tv.states();
    j["actions"] = tv.actions();
    json rates = json::object();
    json costs = json::object();
    const auto& S = tv.states();
    const auto& A = tv.actions();
    for (StateIndex x = 0; x < tv.num_states(); ++x) {
        for (ActionIndex a = 0; a < tv.num_actions(); ++a) {
            costs[S[x]][A[a]] = time_function_to_json(tv.cost_fn(x, a));
            for (StateIndex y = 0; y < tv.num_states(); ++y) {
                const TimeFunction& f = tv.rate_fn(x, a, y);
                if (f.pieces().size() == 1 && f.pieces().front().terms.empty()) continue;
                rates[S[x]][A[a]][S[y]] = time_function_to_json(f);
            }
        }
    }
    j["rates"] = std::move(rates);
    j["costs"] = std::move(costs);
    if (doc.alpha) j["alpha"] = *doc.alpha;
    if (doc.horizon) j["T"] = *doc.horizon;
    if (doc.terminal) {
        json g = json::object();
        for (StateIndex x = 0; x < S.size() && x < doc.terminal->g.size(); ++x) g[S[x]] = doc.terminal->g[x];
        j["terminal_g"] = std::move(g);
    }
    return j;
}

void save_model(const ModelDoc& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << model_to_json(doc).dump(2) << '\n';
}

std::string model_digest(const ModelDoc& doc) {
    const std::string canonical = model_to_json(doc).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

json policy_to_json(const Policy& policy, const std::vector<std::string>& states,
                    const std::vector<std::string>& actions) {
    json j;
    if (const auto* f = std::get_if<StationaryPolicy>(&policy)) {
        j["kind"] = "stationary";
        json acts = json::object();
        for (StateIndex x = 0; x < f->action.size(); ++x) acts[states[x]] = actions[f->action[x]];
        j["actions"] = std::move(acts);
    } else {
        const auto& g = std::get<MarkovPolicyGrid>(policy);
        j["kind"] = "markov";
        j["times"] = g.times;
        json acts = json::object();
        for (StateIndex x = 0; x < states.size(); ++x) {
            json row = json::array();
            for (const auto& r : g.action) row.push_back(actions[r[x]]);
            acts[states[x]] = std::move(row);
        }
        j["actions"] = std::move(acts);
    }
    return j;
}

Policy policy_from_json(const json& j, const std::vector<std::string>& states,
                        const std::vector<std::string>& actions) {
    as_object(j, "policy");
    if (!j.contains("kind") && j.contains("policy")) return policy_from_json(j.at("policy"), states, actions);
    const json& kind = require(j, "kind", "policy");
    const json& acts = as_object(require(j, "actions", "policy"), "policy/actions");
    auto action_of = [&](const json& v, const std::string& path) {
        if (!v.is_string()) schema_fail(path, "expected an action label");
        for (std::size_t a = 0; a < actions.size(); ++a)
            if (actions[a] == v.get<std::string>()) return a;
        schema_fail(path, "unknown action '" + v.get<std::string>() + "'");
    };
    auto lookup = [&](const std::string& label) -> const json& {
        auto it = acts.find(label);
        if (it == acts.end()) schema_fail("policy/actions/" + label, "no action for state");
        return *it;
    };
    if (kind == "stationary") {
        StationaryPolicy f;
        for (const auto& s : states) f.action.push_back(action_of(lookup(s), "policy/actions/" + s));
        return f;
    }
    if (kind == "markov") {
        MarkovPolicyGrid g;
        const json& times = require(j, "times", "policy");
        if (!times.is_array() || times.empty()) schema_fail("policy/times", "expected a nonempty array");
        for (std::size_t k = 0; k < times.size(); ++k)
            g.times.push_back(as_number(times[k], "policy/times/" + std::to_string(k)));
        g.action.assign(g.times.size(), std::vector<ActionIndex>(states.size()));
        for (StateIndex x = 0; x < states.size(); ++x) {
            const json& row = lookup(states[x]);
            if (!row.is_array() || row.size() != g.times.size())
                schema_fail("policy/actions/" + states[x], "expected one action per grid time");
            for (std::size_t k = 0; k < row.size(); ++k)
                g.action[k][x] = action_of(row[k], "policy/actions/" + states[x] + "/" + std::to_string(k));
        }
        return g;
    }
    schema_fail("policy/kind", "expected \"stationary\" or \"markov\"");
}

json values_to_json(const ValueTable& v, const std::vector<std::string>& states) {
    json j = json::object();
    for (StateIndex x = 0; x < v.size(); ++x) j[states[x]] = v[x];
    return j;
}

ValueTable values_from_json(const json& j, const std::vector<std::string>& states) {
    as_object(j, "values");
    if (j.contains("values") && j.at("values").is_object()) return values_from_json(j.at("values"), states);
    ValueTable out;
    for (const auto& s : states) {
        auto it = j.find(s);
        if (it == j.end()) schema_fail("values/" + s, "no value for state");
        ExtReal v;
        try {
            v = it->get<ExtReal>();
        } catch (const std::exception& e) {
            schema_fail("values/" + s, e.what());
        }
        out.v.push_back(v);
    }
    return out;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
}

}  // namespace riskmdp
