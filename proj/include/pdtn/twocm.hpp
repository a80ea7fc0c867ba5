// ============================================================================
// pdtn/twocm.hpp — 2-counter machines and their network encodings
// ============================================================================
//
// Executes deterministic 2-counter machines and compiles them into guarded
// models whose halt-location reachability mirrors the machine's halting:
//
//   * single-automaton encoding: 3 clocks t/x1/x2 and a parameter p; counter
//     values are clock values at the instants where t = 0, and the parameter
//     bounds the counters along the run;
//   * three-process encoding: one clock, three subparts simulating t, x1 and
//     x2, synchronized purely through location guards (invariants optional);
//   * fixed-size encoding: the three-process model plus a chain of sink
//     locations that absorbs the processes beyond the first three.
//
// Location names follow the subscript scheme of the gadget drawings
// (`s_<state>_t`, `l_<state>_x1`, `sink_<i>`, ...) so that witnesses stay
// auditable; a gadget map records each location's machine state and role.
//
// ============================================================================

#ifndef PDTN_TWOCM_HPP
#define PDTN_TWOCM_HPP

#include "pdtn/model.hpp"
#include "pdtn/semantics.hpp"
#include "pdtn/textfmt.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdtn {

// ── Execution ───────────────────────────────────────────────────────────────

struct MachineConfig {
    std::string state;
    long long c1 = 0;
    long long c2 = 0;
};

struct RunResult {
    bool halted = false;
    long long steps = 0;   // instructions executed (up to the cutoff)
    long long c_max = 0;   // maximum counter value observed
    std::vector<MachineConfig> trail;  // configurations 0..steps
};

inline RunResult run_2cm(const MachineProgram& m, long long max_steps) {
    RunResult out;
    MachineConfig cfg{m.initial, 0, 0};
    out.trail.push_back(cfg);
    while (out.steps < max_steps) {
        if (cfg.state == m.halt) {
            out.halted = true;
            return out;
        }
        const MachineStep& step = m.steps.at(cfg.state);
        long long& counter = step.counter == 1 ? cfg.c1 : cfg.c2;
        if (step.kind == MachineStep::Kind::Inc) {
            ++counter;
            cfg.state = step.next;
        } else if (counter == 0) {
            cfg.state = step.next_zero;
        } else {
            --counter;
            cfg.state = step.next;
        }
        if (cfg.c1 > out.c_max) out.c_max = cfg.c1;
        if (cfg.c2 > out.c_max) out.c_max = cfg.c2;
        ++out.steps;
        out.trail.push_back(cfg);
    }
    out.halted = cfg.state == m.halt;
    return out;
}

// ── Compilation ─────────────────────────────────────────────────────────────

struct GadgetLoc {
    std::string machine_state;  // empty for plumbing locations
    std::string role;
    std::string subpart;  // "t", "x1", "x2", or "" (single / shared)
};

struct Compiled2cm {
    GuardedPTA model;
    std::string target;  // reachability target certifying the halt
    std::map<std::string, GadgetLoc> gadget_map;
};

inline Json sidecar_json(const Compiled2cm& c) {
    Json doc;
    doc["target"] = c.target;
    Json locs;
    for (const auto& [name, g] : c.gadget_map) {
        Json e;
        e["state"] = g.machine_state;
        e["role"] = g.role;
        e["subpart"] = g.subpart;
        locs[name] = std::move(e);
    }
    doc["locations"] = std::move(locs);
    return doc;
}

namespace twocmdetail {

constexpr const char* kAction = "a";
constexpr const char* kParam = "p";

struct Builder {
    Compiled2cm out;

    Builder() { out.model.actions.push_back(kAction); }

    void loc(const std::string& name, const Constraint& inv, const std::string& state,
             const std::string& role, const std::string& subpart) {
        out.model.locations.push_back(name);
        if (!inv.is_true()) out.model.invariants[name] = inv;
        out.gadget_map[name] = GadgetLoc{state, role, subpart};
    }

    void edge(const std::string& from, const std::string& to, Constraint guard,
              std::optional<std::string> locguard = std::nullopt,
              std::vector<std::string> resets = {}) {
        std::sort(resets.begin(), resets.end());
        Edge e;
        e.source = from;
        e.target = to;
        e.action = kAction;
        e.guard = std::move(guard);
        e.locguard = std::move(locguard);
        e.resets = std::move(resets);
        out.model.edges.push_back(std::move(e));
    }
};

inline Inequality vs_const(const std::string& clock, Rel rel, long long c) {
    return Inequality{clock, rel, LinearExpr::constant_expr(c)};
}

/// clock rel (p + offset)
inline Inequality vs_param(const std::string& clock, Rel rel, long long offset) {
    return Inequality{clock, rel, LinearExpr::term(1, kParam, offset)};
}

inline Constraint conj(std::initializer_list<Inequality> qs) {
    Constraint c;
    c.conjuncts = qs;
    return c;
}

}  // namespace twocmdetail

// ── Single-automaton encoding ───────────────────────────────────────────────
// 3 clocks, 1 parameter, no location guards, no invariants. When in a state
// location with t = 0, the clock values x1/x2 equal the counters. The boot
// edge requires t = p ∧ t > 1, ruling out p <= 1.

inline Compiled2cm compile_single_pta(const MachineProgram& prog) {
    using namespace twocmdetail;
    Builder b;
    GuardedPTA& m = b.out.model;
    m.name = "2cm_single";
    m.clocks = {"t", "x1", "x2"};
    m.params = {kParam};

    auto state_loc = [](const std::string& q) { return "s_" + q; };

    b.loc("l0", Constraint::truth(), "", "boot", "");
    m.initial = "l0";
    for (const auto& q : prog.states)
        b.loc(state_loc(q), Constraint::truth(), q, "state", "");

    b.edge("l0", state_loc(prog.initial),
           conj({vs_param("t", Rel::Eq, 0), vs_const("t", Rel::Gt, 1)}), std::nullopt,
           {"t", "x1", "x2"});

    for (const auto& [q, step] : prog.steps) {
        const std::string y = step.counter == 1 ? "x1" : "x2";
        const std::string z = step.counter == 1 ? "x2" : "x1";
        if (step.kind == MachineStep::Kind::Inc) {
            // two interleavings of the z-reset (at z = p) and the y-reset
            // (at y = p - 1); both take exactly p time units
            b.loc("l_" + q + "_1", Constraint::truth(), q, "inc_entry", "");
            b.loc("l_" + q + "_2", Constraint::truth(), q, "inc_mid", "");
            b.loc("l_" + q + "_2p", Constraint::truth(), q, "inc_mid", "");
            b.loc("l_" + q + "_3", Constraint::truth(), q, "inc_exit", "");
            b.edge(state_loc(q), "l_" + q + "_1", conj({vs_const("t", Rel::Eq, 0)}));
            b.edge("l_" + q + "_1", "l_" + q + "_2", conj({vs_param(z, Rel::Eq, 0)}), std::nullopt,
                   {z});
            b.edge("l_" + q + "_1", "l_" + q + "_2p", conj({vs_param(y, Rel::Eq, -1)}),
                   std::nullopt, {y});
            b.edge("l_" + q + "_2", "l_" + q + "_3", conj({vs_param(y, Rel::Eq, -1)}),
                   std::nullopt, {y});
            b.edge("l_" + q + "_2p", "l_" + q + "_3", conj({vs_param(z, Rel::Eq, 0)}),
                   std::nullopt, {z});
            b.edge("l_" + q + "_3", state_loc(step.next), conj({vs_param("t", Rel::Eq, 0)}),
                   std::nullopt, {"t"});
        } else {
            // decrement branch: as increment with y reset at y = p + 1
            b.loc("l_" + q + "_1", Constraint::truth(), q, "dec_entry", "");
            b.loc("l_" + q + "_2", Constraint::truth(), q, "dec_mid", "");
            b.loc("l_" + q + "_2p", Constraint::truth(), q, "dec_mid", "");
            b.loc("l_" + q + "_3", Constraint::truth(), q, "dec_exit", "");
            b.edge(state_loc(q), "l_" + q + "_1",
                   conj({vs_const("t", Rel::Eq, 0), vs_const(y, Rel::Gt, 0)}));
            b.edge("l_" + q + "_1", "l_" + q + "_2", conj({vs_param(z, Rel::Eq, 0)}), std::nullopt,
                   {z});
            b.edge("l_" + q + "_1", "l_" + q + "_2p", conj({vs_param(y, Rel::Eq, 1)}),
                   std::nullopt, {y});
            b.edge("l_" + q + "_2", "l_" + q + "_3", conj({vs_param(y, Rel::Eq, 1)}), std::nullopt,
                   {y});
            b.edge("l_" + q + "_2p", "l_" + q + "_3", conj({vs_param(z, Rel::Eq, 0)}),
                   std::nullopt, {z});
            b.edge("l_" + q + "_3", state_loc(step.next), conj({vs_param("t", Rel::Eq, 0)}),
                   std::nullopt, {"t"});
            // zero branch: test y = 0 at t = 0, then let exactly p time
            // units elapse so clock/counter matching is preserved
            b.loc("l_" + q + "_z1", Constraint::truth(), q, "zero_entry", "");
            b.loc("l_" + q + "_z2", Constraint::truth(), q, "zero_mid", "");
            b.edge(state_loc(q), "l_" + q + "_z1",
                   conj({vs_const("t", Rel::Eq, 0), vs_const(y, Rel::Eq, 0)}));
            b.edge("l_" + q + "_z1", "l_" + q + "_z2", conj({vs_param(z, Rel::Eq, 0)}),
                   std::nullopt, {z});
            b.edge("l_" + q + "_z2", state_loc(step.next_zero),
                   conj({vs_param("t", Rel::Eq, 0)}), std::nullopt, {"t", y});
        }
    }

    b.out.target = state_loc(prog.halt);
    b.out.model.name += "_" + prog.initial;
    auto diags = validate(b.out.model);
    if (!diags.empty())
        throw std::logic_error("compile_single_pta: produced invalid model: " + diags.front());
    return std::move(b.out);
}

// ── Three-process encoding ──────────────────────────────────────────────────
// One clock, one parameter. Three disjoint subparts simulate the clocks t,
// x1 and x2 of the single-automaton encoding; the branching initial gadget
// forces the three processes into distinct subparts and the final gadget
// funnels them into the common halt location.

inline Compiled2cm compile_three_process(const MachineProgram& prog, bool with_invariants) {
    using namespace twocmdetail;
    Builder b;
    GuardedPTA& m = b.out.model;
    m.name = std::string("2cm_three") + (with_invariants ? "_inv" : "");
    m.clocks = {"x"};
    m.params = {kParam};

    auto inv = [&](Constraint c) { return with_invariants ? std::move(c) : Constraint::truth(); };
    auto x_eq0 = conj({vs_const("x", Rel::Eq, 0)});
    auto x_le_p = [&](long long off) { return conj({vs_param("x", Rel::Le, off)}); };
    auto sub = [](int counter) { return counter == 1 ? "x1" : "x2"; };
    auto state_loc = [&](const std::string& q, const std::string& sp) {
        return "s_" + q + "_" + sp;
    };

    // entry invariant of a state location: determined by the gadget of the
    // instruction carried by that state, per subpart
    auto state_inv = [&](const std::string& q, const std::string& sp) -> Constraint {
        if (sp == "t") return x_eq0;
        if (q == prog.halt) return x_eq0;
        const MachineStep& step = prog.steps.at(q);
        bool primary = sub(step.counter) == sp;
        if (step.kind == MachineStep::Kind::Inc) return primary ? x_le_p(-1) : x_le_p(0);
        return primary ? x_le_p(1) : x_le_p(0);
    };

    // initial gadget
    b.loc("l0_t", inv(x_le_p(0)), "", "boot", "t");
    m.initial = "l0_t";
    b.loc("l1_t", inv(x_eq0), "", "boot", "t");
    b.loc("l1_x1", inv(x_eq0), "", "boot", "x1");
    b.loc("l1_x2", inv(x_eq0), "", "boot", "x2");

    for (const auto& q : prog.states)
        for (const std::string sp : {"t", "x1", "x2"})
            b.loc(state_loc(q, sp), inv(state_inv(q, sp)), q, "state", sp);

    const std::string s0t = state_loc(prog.initial, "t");
    b.edge("l0_t", "l1_t", conj({vs_param("x", Rel::Eq, 0), vs_const("x", Rel::Gt, 1)}),
           std::nullopt, {"x"});
    b.edge("l0_t", "l1_x1", Constraint::truth(), "l1_t", {"x"});
    b.edge("l0_t", "l1_x2", Constraint::truth(), "l1_x1", {"x"});
    b.edge("l1_t", s0t, x_eq0, "l1_x2");
    b.edge("l1_x1", state_loc(prog.initial, "x1"), x_eq0, s0t);
    b.edge("l1_x2", state_loc(prog.initial, "x2"), x_eq0, s0t);

    // the drawings leave the x1/x2 processes' clocks untouched when entering
    // a state location; the halt state's x = 0 invariant needs them reset,
    // so entry edges into halt-state locations reset the clock
    auto entry_resets = [&](const std::string& q) {
        return q == prog.halt ? std::vector<std::string>{"x"} : std::vector<std::string>{};
    };

    for (const auto& [q, step] : prog.steps) {
        const std::string y = sub(step.counter);
        const std::string z = sub(3 - step.counter);
        if (step.kind == MachineStep::Kind::Inc) {
            const std::string& j = step.next;
            // t subpart
            b.loc("l_" + q + "_t", inv(x_le_p(0)), q, "inc_wait", "t");
            b.edge(state_loc(q, "t"), "l_" + q + "_t", x_eq0);
            b.edge("l_" + q + "_t", state_loc(j, "t"), conj({vs_param("x", Rel::Eq, 0)}),
                   std::nullopt, {"x"});
            // incremented-counter subpart: reset at p - 1
            b.loc("l_" + q + "_" + y, inv(x_le_p(0)), q, "inc_wait", y);
            b.edge(state_loc(q, y), "l_" + q + "_" + y, conj({vs_param("x", Rel::Eq, -1)}),
                   std::nullopt, {"x"});
            b.edge("l_" + q + "_" + y, state_loc(j, y), x_le_p(0), state_loc(j, "t"),
                   entry_resets(j));
            // other-counter subpart: reset at p
            b.loc("l_" + q + "_" + z, inv(x_le_p(0)), q, "inc_wait", z);
            b.edge(state_loc(q, z), "l_" + q + "_" + z, conj({vs_param("x", Rel::Eq, 0)}),
                   std::nullopt, {"x"});
            b.edge("l_" + q + "_" + z, state_loc(j, z), x_le_p(0), state_loc(j, "t"),
                   entry_resets(j));
        } else {
            const std::string& j = step.next;
            const std::string& k = step.next_zero;
            // t subpart: branch on which intermediate the y process reached
            b.loc("l_" + q + "_t", inv(x_le_p(0)), q, "dec_wait", "t");
            b.loc("lz_" + q + "_t", inv(x_le_p(0)), q, "zero_wait", "t");
            b.edge(state_loc(q, "t"), "l_" + q + "_t", x_eq0, "la_" + q + "_" + y);
            b.edge("l_" + q + "_t", state_loc(j, "t"), conj({vs_param("x", Rel::Eq, 0)}),
                   std::nullopt, {"x"});
            b.edge(state_loc(q, "t"), "lz_" + q + "_t", x_eq0, "lz_" + q + "_" + y);
            b.edge("lz_" + q + "_t", state_loc(k, "t"), conj({vs_param("x", Rel::Eq, 0)}),
                   std::nullopt, {"x"});
            // decremented-counter subpart
            b.loc("la_" + q + "_" + y, inv(x_le_p(1)), q, "dec_wait", y);
            b.loc("lb_" + q + "_" + y, inv(x_le_p(0)), q, "dec_wait", y);
            b.loc("lz_" + q + "_" + y, inv(x_le_p(0)), q, "zero_wait", y);
            b.edge(state_loc(q, y), "la_" + q + "_" + y, conj({vs_const("x", Rel::Gt, 0)}),
                   state_loc(q, "t"));
            b.edge("la_" + q + "_" + y, "lb_" + q + "_" + y, conj({vs_param("x", Rel::Eq, 1)}),
                   std::nullopt, {"x"});
            b.edge("lb_" + q + "_" + y, state_loc(j, y), x_le_p(0), state_loc(j, "t"),
                   entry_resets(j));
            b.edge(state_loc(q, y), "lz_" + q + "_" + y, conj({vs_const("x", Rel::Eq, 0)}),
                   state_loc(q, "t"));
            b.edge("lz_" + q + "_" + y, state_loc(k, y), conj({vs_param("x", Rel::Eq, 0)}),
                   state_loc(k, "t"), {"x"});
            // untouched-counter subpart: forced through a reset at x = p on
            // both branches so its value is restored after the p-delay
            b.loc("l_" + q + "_" + z, inv(x_le_p(0)), q, "dec_wait", z);
            b.loc("lz_" + q + "_" + z, inv(x_le_p(0)), q, "zero_wait", z);
            b.edge(state_loc(q, z), "l_" + q + "_" + z, conj({vs_param("x", Rel::Eq, 0)}),
                   "l_" + q + "_t", {"x"});
            b.edge("l_" + q + "_" + z, state_loc(j, z), x_le_p(0), state_loc(j, "t"),
                   entry_resets(j));
            b.edge(state_loc(q, z), "lz_" + q + "_" + z, conj({vs_param("x", Rel::Eq, 0)}),
                   "lz_" + q + "_t", {"x"});
            b.edge("lz_" + q + "_" + z, state_loc(k, z), x_le_p(0), state_loc(k, "t"),
                   entry_resets(k));
        }
    }

    // final gadget: all three processes funnel into the common halt location
    b.loc("lf_t", inv(x_eq0), prog.halt, "final", "t");
    b.loc("lf_x1", inv(x_eq0), prog.halt, "final", "x1");
    b.loc("lf_x2", inv(x_eq0), prog.halt, "final", "x2");
    b.loc("s_halt", inv(x_eq0), prog.halt, "halt", "");
    b.edge(state_loc(prog.halt, "t"), "lf_t", x_eq0);
    b.edge("lf_t", "s_halt", x_eq0, "lf_x2");
    b.edge(state_loc(prog.halt, "x1"), "lf_x1", x_eq0, "lf_t");
    b.edge("lf_x1", "s_halt", x_eq0, "s_halt");
    b.edge(state_loc(prog.halt, "x2"), "lf_x2", x_eq0, "lf_x1");
    b.edge("lf_x2", "s_halt", x_eq0, "s_halt");

    b.out.target = "s_halt";
    auto diags = validate(b.out.model);
    if (!diags.empty())
        throw std::logic_error("compile_three_process: produced invalid model: " + diags.front());
    return std::move(b.out);
}

// ── Fixed network size ──────────────────────────────────────────────────────
// The three-process model with a chain of sink locations: process i can only
// park in sink_i once sink_{i-1} is occupied, and the t process waits for
// sink_{n-1} before starting the simulation. n = 3 is the degenerate case.

inline Compiled2cm compile_fixed_n(const MachineProgram& prog, int n,
                                   bool with_invariants = false) {
    using namespace twocmdetail;
    if (n < 3) throw std::invalid_argument("compile_fixed_n: network size must be >= 3");
    Compiled2cm out = compile_three_process(prog, with_invariants);
    if (n == 3) return out;

    out.model.name = std::string("2cm_fixed") + std::to_string(n) +
                     (with_invariants ? "_inv" : "");
    auto sink = [](int i) { return "sink_" + std::to_string(i); };
    for (int i = 3; i <= n - 1; ++i) {
        out.model.locations.push_back(sink(i));
        out.gadget_map[sink(i)] = GadgetLoc{"", "sink", ""};
    }
    const std::string s0t = "s_" + prog.initial + "_t";
    for (auto& e : out.model.edges)
        if (e.source == "l1_t" && e.target == s0t) e.locguard = sink(n - 1);

    Builder chain;  // reuse the edge helper on the existing model
    chain.out = std::move(out);
    chain.edge("l0_t", sink(3), Constraint::truth(), "l1_x2");
    for (int i = 4; i <= n - 1; ++i)
        chain.edge("l0_t", sink(i), Constraint::truth(), sink(i - 1));

    auto diags = validate(chain.out.model);
    if (!diags.empty())
        throw std::logic_error("compile_fixed_n: produced invalid model: " + diags.front());
    return std::move(chain.out);
}

// ── Witness instrumentation ─────────────────────────────────────────────────
// Replays a halt witness of the single-automaton encoding and checks the
// counter correspondence (x1 = c1 and x2 = c2 whenever a state location is
// entered, where t = 0) and the gadget timing (each increment traversal
// lasts exactly p time units).

struct FidelityReport {
    bool ok = true;
    std::string detail;
    int state_visits = 0;
    int increments_checked = 0;
};

inline FidelityReport check_single_pta_fidelity(const Compiled2cm& enc, long long p_value,
                                                const Trace& witness, const MachineProgram& prog,
                                                long long max_steps = 100000) {
    FidelityReport rep;
    auto fail = [&](std::string why) {
        rep.ok = false;
        rep.detail = std::move(why);
        return rep;
    };

    ParamValuation v;
    v.assignment[twocmdetail::kParam] = p_value;
    GuardedPTA concrete = valuate(enc.model, v);
    RunResult machine = run_2cm(prog, max_steps);

    Configuration cfg = initial_config(concrete, 1);
    Rat now(0);
    std::optional<Rat> last_state_entry;
    std::optional<std::string> last_state;

    auto on_state_entry = [&](const std::string& loc) -> bool {
        const GadgetLoc& g = enc.gadget_map.at(loc);
        if (static_cast<std::size_t>(rep.state_visits) >= machine.trail.size())
            return false;  // witness visits more states than the machine ran
        const MachineConfig& expect = machine.trail[static_cast<std::size_t>(rep.state_visits)];
        const ClockValuation& mu = cfg.procs[0].mu;
        if (g.machine_state != expect.state) return false;
        if (mu.at("t") != Rat(0)) return false;
        if (mu.at("x1") != Rat(expect.c1) || mu.at("x2") != Rat(expect.c2)) return false;
        if (last_state && last_state_entry) {
            const MachineStep& prev = prog.steps.at(*last_state);
            Rat took = now - *last_state_entry;
            if (took != Rat(p_value)) return false;
            if (prev.kind == MachineStep::Kind::Inc) ++rep.increments_checked;
        }
        last_state = g.machine_state;
        last_state_entry = now;
        ++rep.state_visits;
        return true;
    };

    for (std::size_t i = 0; i < witness.steps.size(); ++i) {
        const TimedStep& s = witness.steps[i];
        if (s.kind == TimedStep::Kind::Delay) {
            auto next = apply_delay(cfg, s.delay, concrete);
            if (!next) return fail("witness delay not admissible at step " + std::to_string(i));
            now += s.delay;
            cfg = std::move(*next);
            continue;
        }
        if (!discrete_enabled(cfg, s.proc_index, s.edge_index, concrete))
            return fail("witness step disabled at step " + std::to_string(i));
        cfg = apply_discrete(cfg, s.proc_index, s.edge_index, concrete);
        const std::string& loc = cfg.procs[static_cast<std::size_t>(s.proc_index - 1)].loc;
        auto it = enc.gadget_map.find(loc);
        if (it != enc.gadget_map.end() && it->second.role == "state") {
            if (!on_state_entry(loc))
                return fail("counter correspondence broken entering '" + loc + "' (visit " +
                            std::to_string(rep.state_visits) + ")");
        }
    }

    if (cfg.procs[0].loc != enc.target) return fail("witness does not end in the halt location");
    if (!machine.halted) return fail("machine does not halt but the witness reaches halt");
    if (rep.state_visits != static_cast<int>(machine.trail.size()))
        return fail("witness visited " + std::to_string(rep.state_visits) +
                    " state locations, machine trail has " +
                    std::to_string(machine.trail.size()));
    return rep;
}

}  // namespace pdtn

#endif  // PDTN_TWOCM_HPP
