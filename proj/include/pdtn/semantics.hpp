// ============================================================================
// pdtn/semantics.hpp — concrete semantics of networks of n identical copies
// ============================================================================
//
// Operates on a *valuated* model (empty parameter list). A configuration is
// an ordered list of (location, clock valuation) pairs; steps are delays
// (all clocks advance, invariants hold throughout) and discrete edge firings
// by one process (guard, location guard over the other processes, resets,
// target invariant).
//
// Delay admissibility over [0, d] is decided from endpoints: every conjunct
// is a monotone half-line in the delay, so a conjunction holds on the whole
// interval iff it holds at 0 and at d.
//
// ============================================================================

#ifndef PDTN_SEMANTICS_HPP
#define PDTN_SEMANTICS_HPP

#include "pdtn/model.hpp"
#include "pdtn/textfmt.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdtn {

// ── Indexed model view ──────────────────────────────────────────────────────
// Integer-id form of a valuated model, shared by the replay loop, the zone
// engine and the region oracle.

struct CompiledIneq {
    int clock = 0;
    Rel rel = Rel::Le;
    long long rhs = 0;
};

struct CompiledEdge {
    int index = 0;
    int source = 0;
    std::vector<CompiledIneq> guard;
    int locguard = -1;  // -1 = ⊤
    std::vector<int> resets;
    int target = 0;
};

struct CompiledModel {
    const GuardedPTA* model = nullptr;
    int num_locations = 0;
    int num_clocks = 0;
    int initial = 0;
    std::map<std::string, int> loc_id;
    std::map<std::string, int> clock_id;
    std::vector<std::vector<CompiledIneq>> invariants;  // per location
    std::vector<CompiledEdge> edges;
    std::vector<std::vector<int>> edges_from;  // per location, edge ids in order
    long long max_abs_const = 0;               // over guards and invariants

    const std::string& loc_name(int id) const { return model->locations[id]; }
};

inline CompiledModel compile_model(const GuardedPTA& m) {
    if (!m.params.empty())
        throw std::invalid_argument("compile_model: model still has parameters");
    {
        auto diags = validate(m);
        if (!diags.empty())
            throw std::invalid_argument("compile_model: model fails validation: " + diags.front());
    }
    CompiledModel cm;
    cm.model = &m;
    cm.num_locations = static_cast<int>(m.locations.size());
    cm.num_clocks = static_cast<int>(m.clocks.size());
    for (int i = 0; i < cm.num_locations; ++i) cm.loc_id[m.locations[i]] = i;
    for (int i = 0; i < cm.num_clocks; ++i) cm.clock_id[m.clocks[i]] = i;
    cm.initial = cm.loc_id.at(m.initial);

    ParamValuation empty;
    auto compile_constraint = [&](const Constraint& c) {
        std::vector<CompiledIneq> out;
        out.reserve(c.conjuncts.size());
        for (const auto& q : c.conjuncts) {
            long long rhs = eval_expr(q.rhs, empty);
            out.push_back(CompiledIneq{cm.clock_id.at(q.clock), q.rel, rhs});
            if (std::abs(rhs) > cm.max_abs_const) cm.max_abs_const = std::abs(rhs);
        }
        return out;
    };

    cm.invariants.resize(cm.num_locations);
    for (int i = 0; i < cm.num_locations; ++i)
        cm.invariants[i] = compile_constraint(m.invariant_of(m.locations[i]));

    cm.edges_from.resize(cm.num_locations);
    for (std::size_t k = 0; k < m.edges.size(); ++k) {
        const Edge& e = m.edges[k];
        CompiledEdge ce;
        ce.index = static_cast<int>(k);
        ce.source = cm.loc_id.at(e.source);
        ce.target = cm.loc_id.at(e.target);
        ce.guard = compile_constraint(e.guard);
        ce.locguard = e.locguard ? cm.loc_id.at(*e.locguard) : -1;
        for (const auto& c : e.resets) ce.resets.push_back(cm.clock_id.at(c));
        cm.edges_from[ce.source].push_back(ce.index);
        cm.edges.push_back(std::move(ce));
    }
    return cm;
}

// ── Reachability answers ────────────────────────────────────────────────────

enum class ReachStatus { Reachable, Unreachable, BudgetExceeded };

inline const char* reach_status_text(ReachStatus s) {
    switch (s) {
        case ReachStatus::Reachable: return "reachable";
        case ReachStatus::Unreachable: return "unreachable";
        case ReachStatus::BudgetExceeded: return "budget_exceeded";
    }
    return "?";
}

// ── Reachability goals ──────────────────────────────────────────────────────
// Either a single target location or a global property over location counts.

struct Goal {
    std::optional<std::string> target;
    std::optional<PropertyAst> property;

    static Goal location(std::string name) {
        Goal g;
        g.target = std::move(name);
        return g;
    }
    static Goal prop(PropertyAst a) {
        Goal g;
        g.property = std::move(a);
        return g;
    }
};

struct CompiledGoal {
    struct Node {
        PropertyAst::Kind kind = PropertyAst::Kind::AtLeastOne;
        int loc = -1;
        std::vector<Node> children;
    };
    int target_loc = -1;  // -1 when the goal is a property
    std::optional<Node> property;

    bool eval(const std::vector<int>& locs) const {
        if (target_loc >= 0) {
            for (int l : locs)
                if (l == target_loc) return true;
            return false;
        }
        return eval_node(*property, locs);
    }

private:
    static bool eval_node(const Node& n, const std::vector<int>& locs) {
        switch (n.kind) {
            case PropertyAst::Kind::AtLeastOne:
                for (int l : locs)
                    if (l == n.loc) return true;
                return false;
            case PropertyAst::Kind::NoneIn:
                for (int l : locs)
                    if (l == n.loc) return false;
                return true;
            case PropertyAst::Kind::And:
                for (const auto& ch : n.children)
                    if (!eval_node(ch, locs)) return false;
                return true;
            case PropertyAst::Kind::Or:
                for (const auto& ch : n.children)
                    if (eval_node(ch, locs)) return true;
                return false;
        }
        return false;
    }
};

inline CompiledGoal compile_goal(const Goal& g, const CompiledModel& cm) {
    CompiledGoal out;
    auto resolve = [&](const std::string& name) {
        auto it = cm.loc_id.find(name);
        if (it == cm.loc_id.end())
            throw std::invalid_argument("goal names unknown location '" + name + "'");
        return it->second;
    };
    if (g.target) {
        out.target_loc = resolve(*g.target);
        return out;
    }
    if (!g.property) throw std::invalid_argument("goal carries neither location nor property");
    std::function<CompiledGoal::Node(const PropertyAst&)> build =
        [&](const PropertyAst& a) -> CompiledGoal::Node {
        CompiledGoal::Node n;
        n.kind = a.kind;
        if (a.kind == PropertyAst::Kind::AtLeastOne || a.kind == PropertyAst::Kind::NoneIn)
            n.loc = resolve(a.location);
        for (const auto& ch : a.children) n.children.push_back(build(ch));
        return n;
    };
    out.property = build(*g.property);
    return out;
}

// ── Configurations ──────────────────────────────────────────────────────────

struct ProcState {
    std::string loc;
    ClockValuation mu;
};

struct Configuration {
    std::vector<ProcState> procs;

    int size() const { return static_cast<int>(procs.size()); }
};

struct ReplayError : std::runtime_error {
    std::size_t step_index;
    ReplayError(std::string msg, std::size_t idx)
        : std::runtime_error(std::move(msg)), step_index(idx) {}
};

namespace detail {

inline ParamValuation no_params() { return ParamValuation{}; }

inline ClockValuation zero_valuation(const GuardedPTA& m) {
    ClockValuation mu;
    for (const auto& c : m.clocks) mu.assignment[c] = Rat(0);
    return mu;
}

inline ClockValuation advanced(const ClockValuation& mu, const Rat& d) {
    ClockValuation out = mu;
    for (auto& [c, v] : out.assignment) v += d;
    return out;
}

}  // namespace detail

inline Configuration initial_config(const GuardedPTA& m, int n) {
    if (!m.params.empty())
        throw std::invalid_argument("initial_config: model still has parameters");
    if (n < 1) throw std::invalid_argument("initial_config: network size must be >= 1");
    ClockValuation zero = detail::zero_valuation(m);
    if (!eval_constraint(m.invariant_of(m.initial), zero, detail::no_params()))
        throw std::invalid_argument(
            "initial_config: zero valuation violates the initial invariant");
    Configuration c;
    c.procs.assign(static_cast<std::size_t>(n), ProcState{m.initial, zero});
    return c;
}

/// Advances all clocks by d, or returns nullopt when some process's
/// invariant fails somewhere in [0, d].
inline std::optional<Configuration> apply_delay(const Configuration& c, const Rat& d,
                                                const GuardedPTA& m) {
    if (d < Rat(0)) throw std::invalid_argument("apply_delay: negative delay");
    Configuration out = c;
    for (auto& ps : out.procs) {
        const Constraint& inv = m.invariant_of(ps.loc);
        ClockValuation after = detail::advanced(ps.mu, d);
        if (!eval_constraint(inv, ps.mu, detail::no_params()) ||
            !eval_constraint(inv, after, detail::no_params()))
            return std::nullopt;
        ps.mu = std::move(after);
    }
    return out;
}

/// (proc_index, edge_index) pairs; proc_index is 1-based, edge_index indexes
/// the model's edge list. Order: process index, then edge index.
struct EnabledMove {
    int proc_index;
    int edge_index;
};

inline bool discrete_enabled(const Configuration& c, int proc_index, int edge_index,
                             const GuardedPTA& m) {
    if (proc_index < 1 || proc_index > c.size()) return false;
    if (edge_index < 0 || edge_index >= static_cast<int>(m.edges.size())) return false;
    const Edge& e = m.edges[static_cast<std::size_t>(edge_index)];
    const ProcState& ps = c.procs[static_cast<std::size_t>(proc_index - 1)];
    if (ps.loc != e.source) return false;
    if (!eval_constraint(e.guard, ps.mu, detail::no_params())) return false;
    if (e.locguard) {
        bool witness = false;
        for (int j = 0; j < c.size(); ++j)
            if (j != proc_index - 1 && c.procs[static_cast<std::size_t>(j)].loc == *e.locguard) {
                witness = true;
                break;
            }
        if (!witness) return false;
    }
    ClockValuation after = reset(ps.mu, e.resets);
    return eval_constraint(m.invariant_of(e.target), after, detail::no_params());
}

inline std::vector<EnabledMove> enabled_discrete(const Configuration& c, const GuardedPTA& m) {
    std::vector<EnabledMove> out;
    for (int i = 1; i <= c.size(); ++i)
        for (int k = 0; k < static_cast<int>(m.edges.size()); ++k)
            if (discrete_enabled(c, i, k, m)) out.push_back(EnabledMove{i, k});
    return out;
}

inline Configuration apply_discrete(const Configuration& c, int proc_index, int edge_index,
                                    const GuardedPTA& m) {
    if (!discrete_enabled(c, proc_index, edge_index, m))
        throw std::invalid_argument("apply_discrete: transition is not enabled (proc " +
                                    std::to_string(proc_index) + ", edge " +
                                    std::to_string(edge_index) + ")");
    const Edge& e = m.edges[static_cast<std::size_t>(edge_index)];
    Configuration out = c;
    ProcState& ps = out.procs[static_cast<std::size_t>(proc_index - 1)];
    ps.loc = e.target;
    ps.mu = reset(ps.mu, e.resets);
    return out;
}

// ── Property evaluation ─────────────────────────────────────────────────────

inline bool eval_property(const PropertyAst& phi, const Configuration& c) {
    switch (phi.kind) {
        case PropertyAst::Kind::AtLeastOne:
            for (const auto& ps : c.procs)
                if (ps.loc == phi.location) return true;
            return false;
        case PropertyAst::Kind::NoneIn:
            for (const auto& ps : c.procs)
                if (ps.loc == phi.location) return false;
            return true;
        case PropertyAst::Kind::And:
            for (const auto& ch : phi.children)
                if (!eval_property(ch, c)) return false;
            return true;
        case PropertyAst::Kind::Or:
            for (const auto& ch : phi.children)
                if (eval_property(ch, c)) return true;
            return false;
    }
    return false;
}

inline bool goal_holds(const Goal& g, const Configuration& c, const GuardedPTA& m) {
    if (g.target) {
        if (!m.has_location(*g.target))
            throw std::invalid_argument("goal names unknown location '" + *g.target + "'");
        for (const auto& ps : c.procs)
            if (ps.loc == *g.target) return true;
        return false;
    }
    for (const auto& l : g.property->mentioned_locations())
        if (!m.has_location(l))
            throw std::invalid_argument("goal names unknown location '" + l + "'");
    return eval_property(*g.property, c);
}

// ── Replay ──────────────────────────────────────────────────────────────────

inline Configuration replay(const Trace& t, const GuardedPTA& m, int n) {
    Configuration c = initial_config(m, n);
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const TimedStep& s = t.steps[i];
        if (s.kind == TimedStep::Kind::Delay) {
            auto next = apply_delay(c, s.delay, m);
            if (!next)
                throw ReplayError("replay: inadmissible delay at step " + std::to_string(i), i);
            c = std::move(*next);
        } else {
            if (!discrete_enabled(c, s.proc_index, s.edge_index, m))
                throw ReplayError("replay: disabled discrete step at index " + std::to_string(i),
                                  i);
            c = apply_discrete(c, s.proc_index, s.edge_index, m);
        }
    }
    return c;
}

/// Total duration and the maximum clock value attained anywhere along the
/// replay. Throws ReplayError when the trace does not replay.
inline std::pair<Rat, Rat> trace_time_stats(const Trace& t, const GuardedPTA& m, int n) {
    Configuration c = initial_config(m, n);
    Rat total(0), max_clock(0);
    auto scan = [&](const Configuration& cfg) {
        for (const auto& ps : cfg.procs)
            for (const auto& [name, v] : ps.mu.assignment)
                if (v > max_clock) max_clock = v;
    };
    scan(c);
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const TimedStep& s = t.steps[i];
        if (s.kind == TimedStep::Kind::Delay) {
            auto next = apply_delay(c, s.delay, m);
            if (!next)
                throw ReplayError("trace stats: inadmissible delay at step " + std::to_string(i),
                                  i);
            total += s.delay;
            c = std::move(*next);
            scan(c);  // clocks peak at delay endpoints
        } else {
            if (!discrete_enabled(c, s.proc_index, s.edge_index, m))
                throw ReplayError("trace stats: disabled step at index " + std::to_string(i), i);
            c = apply_discrete(c, s.proc_index, s.edge_index, m);
        }
    }
    return {total, max_clock};
}

// ── Randomized simulation ───────────────────────────────────────────────────
// Deterministic for a fixed seed. Every emitted step is checked admissible
// before it is appended; stops early when no move is available.

inline Trace simulate(const GuardedPTA& m, int n, int steps, std::uint64_t seed) {
    static const Rat kDelayPalette[] = {Rat(1, 2), Rat(1), Rat(2), Rat(1, 3), Rat(3)};
    std::mt19937_64 rng(seed);
    Trace t;
    Configuration c = initial_config(m, n);
    for (int s = 0; s < steps; ++s) {
        std::vector<TimedStep> moves;
        for (const auto& mv : enabled_discrete(c, m))
            moves.push_back(TimedStep::make_discrete(mv.proc_index, mv.edge_index));
        for (const Rat& d : kDelayPalette)
            if (apply_delay(c, d, m)) moves.push_back(TimedStep::make_delay(d));
        if (moves.empty()) break;
        // modulo choice keeps the stream portable across standard libraries
        const TimedStep& pick = moves[rng() % moves.size()];
        if (pick.kind == TimedStep::Kind::Delay)
            c = *apply_delay(c, pick.delay, m);
        else
            c = apply_discrete(c, pick.proc_index, pick.edge_index, m);
        t.steps.push_back(pick);
    }
    return t;
}

}  // namespace pdtn

#endif  // PDTN_SEMANTICS_HPP
