// ============================================================================
// tools/pdtn.cpp — command-line front end
// ============================================================================
//
// Subcommands: classify, reach, check, simulate, compile-2cm, fmt.
// Analytic commands print one JSON document to stdout and a human-readable
// summary to stderr, so outputs stay pipeline-safe.
//
// Exit codes: 0 = answer computed (including unreachable/empty/unknown),
// 2 = parse/validation/flag error, 3 = budget exhausted where the command
// cannot wrap it in a value, 4 = internal error (engine disagreement or a
// failed self-check).
//
// ============================================================================

#include "pdtn/decide.hpp"
#include "pdtn/region.hpp"
#include "pdtn/twocm.hpp"
#include "pdtn/zonereach.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace pdtn;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

long long default_budget() {
    if (const char* env = std::getenv("PDTN_BUDGET")) {
        try {
            return std::stoll(env);
        } catch (const std::exception&) {
            throw std::runtime_error("PDTN_BUDGET is not an integer");
        }
    }
    return 1'000'000;
}

ParamValuation valuation_from_flags(const std::vector<std::string>& defs) {
    ParamValuation v;
    for (const auto& d : defs) {
        auto eq = d.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("--param expects NAME=INT, got '" + d + "'");
        long long value = 0;
        try {
            value = std::stoll(d.substr(eq + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("--param expects NAME=INT, got '" + d + "'");
        }
        if (value < 0) throw std::runtime_error("parameter values must be non-negative");
        v.assignment[d.substr(0, eq)] = value;
    }
    return v;
}

Goal goal_from_flags(const std::string& target, const std::string& prop) {
    if (!target.empty() && !prop.empty())
        throw std::runtime_error("--target and --prop are mutually exclusive");
    if (!target.empty()) return Goal::location(target);
    if (!prop.empty()) return Goal::prop(parse_property(prop));
    throw std::runtime_error("one of --target or --prop is required");
}

Json valuation_json(const ParamValuation& v) {
    Json j = Json::object();
    for (const auto& [p, val] : v.assignment) j[p] = val;
    return j;
}

Json class_report_json(const ClassReport& r) {
    Json j;
    j["clock_count"] = r.clock_count;
    j["param_count"] = r.param_count;
    j["has_invariants"] = r.has_invariants;
    j["has_constant_terms"] = r.has_constant_terms;
    j["fully_parametric"] = r.fully_parametric;
    if (r.lu_partition) {
        Json part;
        part["lower"] = r.lu_partition->lower;
        part["upper"] = r.lu_partition->upper;
        j["lu_partition"] = std::move(part);
    } else {
        j["lu_partition"] = nullptr;
    }
    return j;
}

Json verdict_json(const Verdict& v) {
    Json j;
    j["answer"] = verdict_answer_text(v.answer);
    j["exact"] = v.exact;
    j["method"] = v.method;
    if (v.valuation) j["valuation"] = valuation_json(*v.valuation);
    if (v.n) j["n"] = *v.n;
    if (v.witness) j["witness"] = trace_json(*v.witness);
    if (v.bounds) {
        Json b;
        b["n_max"] = v.bounds->n_max;
        b["p_max"] = v.bounds->p_max;
        b["state_budget"] = v.bounds->state_budget;
        j["bounds"] = std::move(b);
    }
    j["explored"] = v.explored;
    return j;
}

void emit(const Json& doc) { std::cout << doc.dump(2) << "\n"; }

struct OracleMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int run(int argc, char** argv) {
    CLI::App app{"parametric disjunctive timed networks"};
    app.require_subcommand(1);

    std::string model_path, machine_path, target, prop, mode_str, witness_path, out_path,
        encoding = "single";
    std::vector<std::string> param_defs;
    int n = 1, steps = 0, bound_n = 4;
    long long bound_p = 4, seed = 0;
    std::optional<long long> budget_flag;
    bool with_oracle = false, with_invariants = false;

    auto* classify_cmd = app.add_subcommand("classify", "report the model's syntactic class");
    classify_cmd->add_option("model", model_path)->required();

    auto* reach_cmd =
        app.add_subcommand("reach", "symbolic reachability at a fixed valuation and size");
    reach_cmd->add_option("model", model_path)->required();
    reach_cmd->add_option("--target", target, "target location");
    reach_cmd->add_option("--prop", prop, "global property");
    reach_cmd->add_option("--n", n, "network size")->required();
    reach_cmd->add_option("--param", param_defs, "parameter valuation NAME=INT (repeatable)");
    reach_cmd->add_option("--witness", witness_path, "write the witness trace to this path");
    reach_cmd->add_option("--budget", budget_flag, "state budget");
    reach_cmd->add_flag("--oracle", with_oracle, "cross-check with the region-graph oracle");

    auto* check_cmd = app.add_subcommand("check", "parametrised reachability-emptiness");
    check_cmd->add_option("model", model_path)->required();
    check_cmd->add_option("--mode", mode_str, "pr-e or pgr-e")->required();
    check_cmd->add_option("--target", target, "target location");
    check_cmd->add_option("--prop", prop, "global property");
    check_cmd->add_option("--bound-n", bound_n, "network-size bound for bounded search");
    check_cmd->add_option("--bound-p", bound_p, "per-parameter bound for bounded search");
    check_cmd->add_option("--budget", budget_flag, "state budget");

    auto* sim_cmd = app.add_subcommand("simulate", "randomized admissible walk");
    sim_cmd->add_option("model", model_path)->required();
    sim_cmd->add_option("--n", n)->required();
    sim_cmd->add_option("--param", param_defs, "parameter valuation NAME=INT (repeatable)");
    sim_cmd->add_option("--steps", steps)->required();
    sim_cmd->add_option("--seed", seed)->required();

    auto* compile_cmd = app.add_subcommand("compile-2cm", "compile a 2-counter machine");
    compile_cmd->add_option("machine", machine_path)->required();
    compile_cmd->add_option("--encoding", encoding, "single | three | fixed:N");
    compile_cmd->add_flag("--invariants", with_invariants, "keep the gadget invariants");
    compile_cmd->add_option("-o,--output", out_path, "model file to write")->required();

    auto* fmt_cmd = app.add_subcommand("fmt", "canonical re-serialization to stdout");
    fmt_cmd->add_option("model", model_path)->required();

    CLI11_PARSE(app, argc, argv);
    const long long budget = budget_flag.value_or(default_budget());

    if (classify_cmd->parsed()) {
        GuardedPTA m = parse_model(read_file(model_path));
        ClassReport r = classify(m);
        emit(class_report_json(r));
        std::cerr << m.name << ": " << r.clock_count << " clock(s), " << r.param_count
                  << " parameter(s), " << (r.has_invariants ? "with" : "no") << " invariants, "
                  << (r.lu_partition ? "L/U" : "not L/U") << ", "
                  << (r.fully_parametric ? "fully parametric" : "has constant terms") << "\n";
        return 0;
    }

    if (reach_cmd->parsed()) {
        GuardedPTA m = parse_model(read_file(model_path));
        Goal goal = goal_from_flags(target, prop);
        ParamValuation v = valuation_from_flags(param_defs);
        ReachOptions opts;
        opts.state_budget = budget;
        ReachResult r = reach(m, v, n, goal, opts);

        Json doc;
        doc["status"] = reach_status_text(r.status);
        doc["explored"] = r.explored;
        if (r.witness) doc["witness"] = trace_json(*r.witness);

        if (with_oracle) {
            GuardedPTA concrete = m.params.empty() ? m : valuate(m, v);
            OracleResult o = region_reach_oracle(concrete, n, goal, budget);
            doc["oracle"] = reach_status_text(o.status);
            bool comparable = o.status != ReachStatus::BudgetExceeded &&
                              r.status != ReachStatus::BudgetExceeded;
            if (comparable && o.status != r.status)
                throw OracleMismatch("zone engine and region oracle disagree: " +
                                     std::string(reach_status_text(r.status)) + " vs " +
                                     reach_status_text(o.status));
        }

        if (r.witness && !witness_path.empty()) {
            Json w;
            w["model"] = m.name;
            w["n"] = n;
            w["valuation"] = valuation_json(v);
            w["trace"] = trace_json(*r.witness);
            std::ofstream out(witness_path);
            if (!out) throw std::runtime_error("cannot write witness file: " + witness_path);
            out << w.dump(2) << "\n";
        }

        emit(doc);
        std::cerr << reach_status_text(r.status) << " (" << r.explored
                  << " symbolic states)\n";
        return 0;
    }

    if (check_cmd->parsed()) {
        GuardedPTA m = parse_model(read_file(model_path));
        Mode mode;
        if (mode_str == "pr-e")
            mode = Mode::PRe;
        else if (mode_str == "pgr-e")
            mode = Mode::PGRe;
        else
            throw std::runtime_error("--mode must be pr-e or pgr-e");
        ProblemInstance inst{std::move(m), mode, goal_from_flags(target, prop)};
        Bounds bounds;
        bounds.n_max = bound_n;
        bounds.p_max = bound_p;
        bounds.state_budget = budget;
        Verdict verdict = solve(inst, bounds);
        emit(verdict_json(verdict));
        std::cerr << verdict_answer_text(verdict.answer) << " via " << verdict.method
                  << (verdict.exact ? " (exact)" : " (bounded)") << "\n";
        return 0;
    }

    if (sim_cmd->parsed()) {
        GuardedPTA m = parse_model(read_file(model_path));
        ParamValuation v = valuation_from_flags(param_defs);
        GuardedPTA concrete = m.params.empty() ? m : valuate(m, v);
        Trace t = simulate(concrete, n, steps, static_cast<std::uint64_t>(seed));
        emit(trace_json(t));
        std::cerr << t.steps.size() << " step(s) emitted\n";
        return 0;
    }

    if (compile_cmd->parsed()) {
        MachineProgram prog = parse_machine(read_file(machine_path));
        Compiled2cm enc;
        if (encoding == "single") {
            enc = compile_single_pta(prog);
        } else if (encoding == "three") {
            enc = compile_three_process(prog, with_invariants);
        } else if (encoding.rfind("fixed:", 0) == 0) {
            int size = 0;
            try {
                size = std::stoi(encoding.substr(6));
            } catch (const std::exception&) {
                throw std::runtime_error("--encoding fixed:N needs an integer N");
            }
            enc = compile_fixed_n(prog, size, with_invariants);
        } else {
            throw std::runtime_error("--encoding must be single, three, or fixed:N");
        }

        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write model file: " + out_path);
        out << serialize_model(enc.model);

        std::string base = out_path;
        if (base.size() > 10 && base.substr(base.size() - 10) == ".pdtn.json")
            base.resize(base.size() - 10);
        else if (base.size() > 5 && base.substr(base.size() - 5) == ".json")
            base.resize(base.size() - 5);
        std::string sidecar_path = base + ".gadgets.json";
        Json side = sidecar_json(enc);
        side["output"] = out_path;
        {
            std::ofstream sout(sidecar_path);
            if (!sout) throw std::runtime_error("cannot write sidecar file: " + sidecar_path);
            sout << side.dump(2) << "\n";
        }
        emit(side);
        std::cerr << "wrote " << out_path << " (" << enc.model.locations.size()
                  << " locations, " << enc.model.edges.size() << " edges), gadget map "
                  << sidecar_path << "\n";
        return 0;
    }

    if (fmt_cmd->parsed()) {
        GuardedPTA m = parse_model(read_file(model_path));
        std::cout << serialize_model(m);
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const OracleMismatch& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const pdtn::BudgetExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
