#include "cli.hpp"

#include "riskmdp/model_io.hpp"
#include "riskmdp/simulate.hpp"
#include "riskmdp/stationary.hpp"
#include "riskmdp/timegrid.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

namespace riskmdp::cli {

using nlohmann::json;

namespace {

// Raised for user-facing input problems that are not model-file errors.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string model;
    std::string policy;
    std::string values;
    double tol = 1e-12;
    std::size_t max_iter = 100000;
    double cap = 1e15;
    std::optional<double> alpha;
    std::optional<double> horizon;
    double tail_tol = 1e-8;
    std::optional<double> step;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
    double t_max = 1e6;
    std::size_t jump_cap = 1000000;
    std::string state;
    unsigned workers = 0;
    std::string out;
    std::string format = "json";
};

json model_header(const ModelDoc& doc, const Flags& flags) {
    return {{"path", flags.model},
            {"name", doc.name},
            {"kind", std::string(to_string(doc.kind))},
            {"digest", model_digest(doc)},
            {"states", doc.states()}};
}

const CtmdpModel& homogeneous_payload(const ModelDoc& doc, const char* command) {
    const auto* m = std::get_if<CtmdpModel>(&doc.model);
    if (!m) throw InputError(std::string(command) + " needs a model with time-constant rates and costs");
    return *m;
}

json residual_json(const std::vector<std::string>& states, const std::vector<std::optional<double>>& r,
                   double& max_abs) {
    json j = json::object();
    max_abs = 0.0;
    for (StateIndex x = 0; x < r.size(); ++x) {
        if (r[x]) {
            j[states[x]] = *r[x];
            max_abs = std::max(max_abs, std::abs(*r[x]));
        } else {
            j[states[x]] = "skipped (infinite value)";
        }
    }
    return j;
}

json labels(const std::vector<std::string>& states, const std::vector<StateIndex>& xs) {
    json j = json::array();
    for (StateIndex x : xs) j.push_back(states[x]);
    return j;
}

json trace_summary(const IterationTrace& trace, const SolveOptions& opts) {
    return {{"iterations", trace.iterations},
            {"converged", trace.converged},
            {"final_delta", trace.records.empty() ? 0.0 : trace.records.back().delta},
            {"final_weighted_delta", trace.records.empty() ? 0.0 : trace.records.back().weighted_delta},
            {"tolerance", opts.tol},
            {"cap", opts.cap}};
}

json grid_json(const std::vector<std::string>& states, const MarkovValueGrid& g) {
    json values = json::object();
    for (StateIndex x = 0; x < states.size(); ++x) {
        json col = json::array();
        for (const auto& row : g.values) col.push_back(row[x]);
        values[states[x]] = std::move(col);
    }
    return {{"times", g.times}, {"values", std::move(values)}};
}

SolveOptions solve_options(const Flags& f) {
    if (!(f.tol > 0.0)) throw InputError("--tol must be > 0");
    if (f.max_iter == 0) throw InputError("--max-iter must be > 0");
    if (!(f.cap > 0.0)) throw InputError("--cap must be > 0");
    return {f.tol, f.max_iter, f.cap};
}

int cmd_solve(const Flags& f, RunReport& report, bool full_trace) {
    const ModelDoc doc = load_model(f.model);
    const CtmdpModel& m = homogeneous_payload(doc, "solve");
    const SolveOptions opts = solve_options(f);
    const SolveResult sol = value_iteration(m, opts);
    const StationaryPolicy policy = extract_policy(m, sol.values);
    const StatePartition part = classify_states(m, sol.values, sol.trace);
    double max_abs = 0.0;
    const auto& S = m.states();

    auto& b = report.body;
    b["model"] = model_header(doc, f);
    b["values"] = values_to_json(sol.values, S);
    b["policy"] = policy_to_json(Policy{policy}, S, m.actions());
    b["residual"] = residual_json(S, residual(m, sol.values), max_abs);
    b["max_abs_residual"] = max_abs;
    b["partition"] = {{"finite", labels(S, part.finite)},
                      {"infinite_exact", labels(S, part.infinite_exact)},
                      {"infinite_suspected", labels(S, part.infinite_suspected)}};
    // States outside the finite set get an action, but nothing pins it down there.
    b["policy_unconstrained_states"] = labels(S, [&] {
        auto v = part.infinite_exact;
        v.insert(v.end(), part.infinite_suspected.begin(), part.infinite_suspected.end());
        return v;
    }());
    b["trace"] = trace_summary(sol.trace, opts);
    json marks = json::object();
    for (StateIndex x = 0; x < S.size(); ++x)
        if (const auto& mark = sol.trace.infinite[x])
            marks[S[x]] = {{"iteration", mark->iteration}, {"exact", mark->exact}};
    b["trace"]["infinite_marks"] = std::move(marks);
    if (full_trace) {
        json records = json::array();
        for (std::size_t i = 0; i < sol.trace.records.size(); ++i) {
            const auto& r = sol.trace.records[i];
            records.push_back({{"iter", i + 1},
                               {"delta", r.delta},
                               {"weighted_delta", r.weighted_delta},
                               {"inf_count", r.inf_count},
                               {"elapsed_seconds", r.elapsed_seconds}});
        }
        b["trace"]["records"] = std::move(records);
    }
    report.tables.push_back(value_table_csv(S, sol.values));
    report.tables.push_back(policy_csv(S, m.actions(), policy));
    report.tables.push_back(trace_csv(sol.trace));
    return sol.trace.converged ? kOk : kNotConverged;
}

int cmd_evaluate(const Flags& f, RunReport& report) {
    if (f.policy.empty()) throw InputError("evaluate requires --policy");
    const ModelDoc doc = load_model(f.model);
    const CtmdpModel& m = homogeneous_payload(doc, "evaluate");
    const Policy policy = policy_from_json(read_json_file(f.policy), m.states(), m.actions());
    const auto* stationary = std::get_if<StationaryPolicy>(&policy);
    if (!stationary) throw InputError("evaluate needs a stationary policy");
    const SolveOptions opts = solve_options(f);
    const SolveResult sol = evaluate_policy(m, *stationary, opts);
    const StatePartition part = classify_states(m, sol.values, sol.trace);
    const auto& S = m.states();

    auto& b = report.body;
    b["model"] = model_header(doc, f);
    b["policy"] = policy_to_json(policy, S, m.actions());
    b["values"] = values_to_json(sol.values, S);
    b["partition"] = {{"finite", labels(S, part.finite)},
                      {"infinite_exact", labels(S, part.infinite_exact)},
                      {"infinite_suspected", labels(S, part.infinite_suspected)}};
    b["trace"] = trace_summary(sol.trace, opts);
    report.tables.push_back(value_table_csv(S, sol.values));
    report.tables.push_back(trace_csv(sol.trace));
    return sol.trace.converged ? kOk : kNotConverged;
}

int cmd_solve_horizon(const Flags& f, RunReport& report) {
    const ModelDoc doc = load_model(f.model);
    const auto horizon = f.horizon ? f.horizon : doc.horizon;
    if (!horizon) throw InputError("solve-horizon needs T in the model file or --horizon");
    const double alpha = f.alpha.value_or(doc.kind == ModelKind::finite_horizon ? doc.alpha.value_or(0.0) : 0.0);
    const double step = f.step.value_or(1e-3);
    if (!(step > 0.0)) throw InputError("--step must be > 0");
    const TerminalCost g = doc.terminal.value_or(TerminalCost{std::vector<double>(doc.states().size(), 0.0)});
    const TimeVaryingModel base = doc.time_varying();

    BackwardOptions bopts{std::min(step, 1e-3), true};
    const TimeGrid grid = TimeGrid::uniform(*horizon, step);
    const MarkovValueGrid vg = finite_horizon_value(base, *horizon, alpha, g, grid, bopts);
    const TimeVaryingModel augmented = augment_finite_horizon(base, *horizon, alpha, g);
    const MarkovPolicyGrid policy = extract_markov_policy(augmented, vg);
    const auto& S = base.states();

    auto& b = report.body;
    b["model"] = model_header(doc, f);
    b["horizon"] = *horizon;
    b["alpha"] = alpha;
    b["step"] = step;
    b["values"] = values_to_json(vg.initial(), S);
    b["integration_error_estimate"] = vg.error_estimate.value_or(0.0);
    b["grid"] = grid_json(S, vg);
    b["policy"] = policy_to_json(Policy{policy}, S, base.actions());
    report.tables.push_back(value_table_csv(S, vg.initial()));
    report.tables.push_back(grid_csv(S, vg));
    report.tables.push_back(markov_policy_csv(S, base.actions(), policy));
    return kOk;
}

int cmd_solve_discounted(const Flags& f, RunReport& report) {
    const ModelDoc doc = load_model(f.model);
    const CtmdpModel& m = homogeneous_payload(doc, "solve-discounted");
    const auto alpha = f.alpha ? f.alpha : doc.alpha;
    if (!alpha || !(*alpha > 0.0)) throw InputError("solve-discounted needs alpha > 0 (model file or --alpha)");
    if (!(f.tail_tol > 0.0)) throw InputError("--tail-tol must be > 0");
    const double step = f.step.value_or(1e-2);
    if (!(step > 0.0)) throw InputError("--step must be > 0");

    const DiscountedSolution sol = discounted_value(m, *alpha, f.tail_tol, step, BackwardOptions{1e-3, true});
    const MarkovPolicyGrid policy = extract_markov_policy(sol.augmented, sol.grid);
    const auto& S = m.states();

    auto& b = report.body;
    b["model"] = model_header(doc, f);
    b["alpha"] = *alpha;
    b["values"] = values_to_json(sol.value, S);
    b["truncation_horizon"] = sol.truncation_horizon;
    b["tail_bound"] = sol.tail_bound;
    b["integration_error_estimate"] = sol.integration_error;
    b["certified_error"] = sol.certified_error;
    b["grid"] = grid_json(S, sol.grid);
    b["policy"] = policy_to_json(Policy{policy}, S, m.actions());
    report.tables.push_back(value_table_csv(S, sol.value));
    report.tables.push_back(grid_csv(S, sol.grid));
    report.tables.push_back(markov_policy_csv(S, m.actions(), policy));
    return kOk;
}

TimeVaryingModel simulation_model(const ModelDoc& doc, const Flags& f) {
    switch (doc.kind) {
        case ModelKind::homogeneous:
        case ModelKind::time_varying: return doc.time_varying();
        case ModelKind::discounted: {
            const auto alpha = f.alpha ? f.alpha : doc.alpha;
            return augment_discounted(std::get<CtmdpModel>(doc.model), alpha.value_or(0.0));
        }
        case ModelKind::finite_horizon: {
            const double horizon = f.horizon.value_or(doc.horizon.value_or(0.0));
            const double alpha = f.alpha.value_or(doc.alpha.value_or(0.0));
            const TerminalCost g = doc.terminal.value_or(TerminalCost{std::vector<double>(doc.states().size(), 0.0)});
            return augment_finite_horizon(doc.time_varying(), horizon, alpha, g);
        }
    }
    throw InputError("unsupported model kind");
}

int cmd_simulate(const Flags& f, RunReport& report) {
    if (f.policy.empty()) throw InputError("simulate requires --policy");
    if (f.n < 2) throw InputError("--n must be at least 2");
    if (!(f.t_max > 0.0)) throw InputError("--t-max must be > 0");
    if (f.jump_cap == 0) throw InputError("--jump-cap must be > 0");
    const ModelDoc doc = load_model(f.model);
    const TimeVaryingModel m = simulation_model(doc, f);
    const Policy policy = policy_from_json(read_json_file(f.policy), m.states(), m.actions());

    std::vector<StateIndex> starts;
    if (f.state.empty()) {
        for (StateIndex x = 0; x < m.num_states(); ++x) starts.push_back(x);
    } else {
        auto x = m.state_index(f.state);
        if (!x) throw InputError("unknown --state '" + f.state + "'");
        starts.push_back(*x);
    }

    SimulationOptions sopts;
    sopts.t_max = f.t_max;
    sopts.jump_cap = f.jump_cap;
    sopts.workers = f.workers;
    sopts.record_jumps = false;

    auto& b = report.body;
    b["model"] = model_header(doc, f);
    b["policy"] = policy_to_json(policy, m.states(), m.actions());
    b["settings"] = {{"n", f.n},
                     {"seed", f.seed},
                     {"t_max", f.t_max},
                     {"jump_cap", f.jump_cap},
                     {"workers", resolve_worker_count(f.workers)}};
    json estimates = json::object();
    CsvTable table{"estimates", {"state", "mean", "std_error", "n", "truncation_fraction", "seed"}, {}};
    for (StateIndex x : starts) {
        const McEstimate est = estimate_utility(m, policy, x, f.n, f.seed, sopts);
        estimates[m.states()[x]] = {{"mean", est.mean},
                                    {"std_error", est.std_error},
                                    {"n_samples", est.n_samples},
                                    {"truncation_fraction", est.truncation_fraction},
                                    {"time_truncated", est.time_truncated},
                                    {"jump_capped", est.jump_capped},
                                    {"seed", est.seed},
                                    {"divergent", est.divergent},
                                    {"heavy_tail_warning", est.heavy_tail_warning}};
        table.rows.push_back({m.states()[x], format_real(est.mean), format_real(est.std_error),
                              std::to_string(est.n_samples), format_real(est.truncation_fraction),
                              std::to_string(est.seed)});
    }
    b["estimates"] = std::move(estimates);
    report.tables.push_back(std::move(table));
    return kOk;
}

int cmd_check(const Flags& f, RunReport& report) {
    if (f.values.empty()) throw InputError("check requires --values");
    const ModelDoc doc = load_model(f.model);
    const CtmdpModel& m = homogeneous_payload(doc, "check");
    const ValueTable v = values_from_json(read_json_file(f.values), m.states());
    for (StateIndex x = 0; x < v.size(); ++x)
        if (v[x] < ExtReal(1.0)) throw InputError("value table entries must be >= 1");
    double max_abs = 0.0;
    auto& b = report.body;
    b["model"] = model_header(doc, f);
    b["values"] = values_to_json(v, m.states());
    b["residual"] = residual_json(m.states(), residual(m, v), max_abs);
    b["max_abs_residual"] = max_abs;
    CsvTable table{"residual", {"state", "residual"}, {}};
    const auto r = residual(m, v);
    for (StateIndex x = 0; x < r.size(); ++x)
        table.rows.push_back({m.states()[x], r[x] ? format_real(*r[x]) : "skipped"});
    report.tables.push_back(std::move(table));
    return kOk;
}

void emit(const RunReport& report, const Flags& f, ReportFormat format, std::ostream& out) {
    if (!f.out.empty()) {
        write_report(report, format, f.out);
        return;
    }
    if (format == ReportFormat::json) {
        out << report.body.dump(2) << '\n';
        return;
    }
    for (const auto& table : report.tables) out << "# " << table.name << '\n' << to_csv(table);
}

std::string join(const std::vector<std::string>& args) {
    std::string s = "riskmdp";
    for (const auto& a : args) s += ' ' + a;
    return s;
}

}  // namespace

CommandResult run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CommandResult result;
    Flags f;
    CLI::App app{"Risk-sensitive CTMDP / PDMDP solver", "riskmdp"};
    app.require_subcommand(1);

    auto add_model = [&](CLI::App* sub) { sub->add_option("--model", f.model, "Model JSON file")->required(); };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--tol", f.tol, "Stop when the rate-weighted change falls below this");
        sub->add_option("--max-iter", f.max_iter, "Iteration limit");
        sub->add_option("--cap", f.cap, "Values above this are set to inf and flagged suspected");
    };
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("--out", f.out, "Output file (json) or directory (csv)");
        sub->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };

    auto* solve = app.add_subcommand("solve", "Value iteration, optimal policy, residuals, state classification");
    auto* iterate = app.add_subcommand("iterate", "Value iteration with the per-iteration trace");
    auto* evaluate = app.add_subcommand("evaluate", "Value of a stationary policy");
    auto* horizon = app.add_subcommand("solve-horizon", "Finite-horizon value and Markov policy");
    auto* discounted = app.add_subcommand("solve-discounted", "Discounted value and Markov policy");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of a policy's exponential utility");
    auto* check = app.add_subcommand("check", "Optimality-equation residual of a value table");

    for (auto* sub : {solve, iterate, evaluate, horizon, discounted, simulate, check}) {
        add_model(sub);
        add_output(sub);
    }
    for (auto* sub : {solve, iterate, evaluate}) add_solver(sub);
    evaluate->add_option("--policy", f.policy, "Policy JSON file")->required();
    for (auto* sub : {horizon, discounted, simulate}) {
        sub->add_option("--alpha", f.alpha, "Discount rate");
        sub->add_option("--horizon", f.horizon, "Horizon T");
    }
    for (auto* sub : {horizon, discounted}) sub->add_option("--step", f.step, "Grid spacing (RK4 substeps are at most min(step, 1e-3))");
    discounted->add_option("--tail-tol", f.tail_tol, "Tolerance of the truncation tail bound");
    simulate->add_option("--policy", f.policy, "Policy JSON file (a solve report works too)")->required();
    simulate->add_option("--n", f.n, "Trajectories per initial state");
    simulate->add_option("--seed", f.seed, "Seed of the counter-based streams");
    simulate->add_option("--t-max", f.t_max, "Time truncation");
    simulate->add_option("--jump-cap", f.jump_cap, "Jump truncation");
    simulate->add_option("--state", f.state, "Initial state (default: every state)");
    simulate->add_option("--workers", f.workers, "Worker threads (default: hardware, capped by RISKMDP_THREADS)");
    check->add_option("--values", f.values, "Value table JSON file ({state: value} or a report)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream sink_out;
        std::ostringstream sink_err;
        const int code = app.exit(e, sink_out, sink_err);
        out << sink_out.str();
        err << sink_err.str();
        result.exit_code = code == 0 ? kOk : kInputError;
        return result;
    }

    const auto format = parse_report_format(f.format).value_or(ReportFormat::json);
    const auto started = std::chrono::steady_clock::now();
    result.report.body["command"] = join(args);
    try {
        if (solve->parsed()) {
            result.exit_code = cmd_solve(f, result.report, false);
        } else if (iterate->parsed()) {
            result.exit_code = cmd_solve(f, result.report, true);
        } else if (evaluate->parsed()) {
            result.exit_code = cmd_evaluate(f, result.report);
        } else if (horizon->parsed()) {
            result.exit_code = cmd_solve_horizon(f, result.report);
        } else if (discounted->parsed()) {
            result.exit_code = cmd_solve_discounted(f, result.report);
        } else if (simulate->parsed()) {
            result.exit_code = cmd_simulate(f, result.report);
        } else if (check->parsed()) {
            result.exit_code = cmd_check(f, result.report);
        }
    } catch (const ParseError& e) {
        err << "error [parse]: " << e.what() << '\n';
        result.exit_code = kInputError;
        return result;
    } catch (const SchemaError& e) {
        err << "error [schema]: " << e.what() << '\n';
        result.exit_code = kInputError;
        return result;
    } catch (const InvariantError& e) {
        err << "error [invariant]: " << e.what() << '\n';
        result.exit_code = kInputError;
        return result;
    } catch (const BackwardIntegrationError& e) {
        err << "error [integration]: " << e.what() << '\n';
        result.exit_code = kNotConverged;
        return result;
    } catch (const InputError& e) {
        err << "error [input]: " << e.what() << '\n';
        result.exit_code = kInputError;
        return result;
    } catch (const std::invalid_argument& e) {
        err << "error [input]: " << e.what() << '\n';
        result.exit_code = kInputError;
        return result;
    }

    result.report.body["exit_code"] = result.exit_code;
    result.report.body["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    try {
        emit(result.report, f, format, out);
    } catch (const std::runtime_error& e) {
        err << "error [io]: " << e.what() << '\n';
        result.exit_code = kInputError;
    }
    if (result.exit_code == kNotConverged) err << "warning: iteration did not converge within --max-iter\n";
    return result;
}

}  // namespace riskmdp::cli
