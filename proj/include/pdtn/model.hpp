// ============================================================================
// pdtn/model.hpp — guarded parametric timed automata
// ============================================================================
//
// Syntax of the model: locations, clocks, integer timing parameters,
// constraints (conjunctions of  clock ⋈ Σ coef·param + const), edges with
// optional location guards, and per-location invariants.
//
// Also houses valuation machinery (parameter substitution, constraint
// evaluation, clock resets) and syntactic subclass classification
// (lower/upper parameter partition, fully-parametric check).
//
// All values are immutable after construction and safe to share across
// threads read-only.
//
// ============================================================================

#ifndef PDTN_MODEL_HPP
#define PDTN_MODEL_HPP

#include "pdtn/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdtn {

// ── Relations ───────────────────────────────────────────────────────────────

enum class Rel { Lt, Le, Eq, Ge, Gt };

inline const char* rel_text(Rel r) {
    switch (r) {
        case Rel::Lt: return "<";
        case Rel::Le: return "<=";
        case Rel::Eq: return "=";
        case Rel::Ge: return ">=";
        case Rel::Gt: return ">";
    }
    return "?";
}

inline std::optional<Rel> rel_from_text(const std::string& s) {
    if (s == "<") return Rel::Lt;
    if (s == "<=") return Rel::Le;
    if (s == "=") return Rel::Eq;
    if (s == ">=") return Rel::Ge;
    if (s == ">") return Rel::Gt;
    return std::nullopt;
}

// ── LinearExpr ──────────────────────────────────────────────────────────────
// Σ coef·param + constant, in canonical form: terms sorted by parameter
// name, no duplicate parameter, no zero coefficient.

struct LinearExpr {
    std::vector<std::pair<long long, std::string>> terms;
    long long constant = 0;

    static LinearExpr constant_expr(long long c) {
        LinearExpr e;
        e.constant = c;
        return e;
    }

    static LinearExpr term(long long coef, std::string param, long long c = 0) {
        LinearExpr e;
        if (coef != 0) e.terms.emplace_back(coef, std::move(param));
        e.constant = c;
        return e;
    }

    /// Merge duplicate parameters, drop zero coefficients, sort by name.
    void normalize() {
        std::map<std::string, long long> acc;
        for (const auto& [coef, name] : terms) acc[name] += coef;
        terms.clear();
        for (const auto& [name, coef] : acc)
            if (coef != 0) terms.emplace_back(coef, name);
    }

    bool is_constant() const { return terms.empty(); }

    bool operator==(const LinearExpr& o) const {
        return terms == o.terms && constant == o.constant;
    }
};

// ── Constraints ─────────────────────────────────────────────────────────────

struct Inequality {
    std::string clock;
    Rel rel = Rel::Le;
    LinearExpr rhs;

    bool operator==(const Inequality& o) const {
        return clock == o.clock && rel == o.rel && rhs == o.rhs;
    }
};

/// Conjunction of inequalities; the empty conjunction is True.
struct Constraint {
    std::vector<Inequality> conjuncts;

    static Constraint truth() { return Constraint{}; }

    bool is_true() const { return conjuncts.empty(); }

    bool operator==(const Constraint& o) const { return conjuncts == o.conjuncts; }
};

// ── Edges and the automaton ─────────────────────────────────────────────────

struct Edge {
    std::string source;
    Constraint guard;                      // True when empty
    std::optional<std::string> locguard;   // absent = ⊤
    std::string action;
    std::vector<std::string> resets;       // sorted, unique
    std::string target;

    bool operator==(const Edge& o) const {
        return source == o.source && guard == o.guard && locguard == o.locguard &&
               action == o.action && resets == o.resets && target == o.target;
    }
};

struct GuardedPTA {
    std::string name;
    std::vector<std::string> actions;
    std::vector<std::string> locations;   // declaration order
    std::string initial;
    std::vector<std::string> clocks;      // declaration order
    std::vector<std::string> params;      // declaration order
    std::map<std::string, Constraint> invariants;  // missing entry = True
    std::vector<Edge> edges;

    const Constraint& invariant_of(const std::string& loc) const {
        static const Constraint kTrue;
        auto it = invariants.find(loc);
        return it == invariants.end() ? kTrue : it->second;
    }

    bool has_location(const std::string& l) const {
        return std::find(locations.begin(), locations.end(), l) != locations.end();
    }
    bool has_clock(const std::string& c) const {
        return std::find(clocks.begin(), clocks.end(), c) != clocks.end();
    }
    bool has_param(const std::string& p) const {
        return std::find(params.begin(), params.end(), p) != params.end();
    }
    bool has_action(const std::string& a) const {
        return std::find(actions.begin(), actions.end(), a) != actions.end();
    }

    bool operator==(const GuardedPTA& o) const {
        auto trimmed = [](const GuardedPTA& m) {
            std::map<std::string, Constraint> inv;
            for (const auto& [l, c] : m.invariants)
                if (!c.is_true()) inv[l] = c;
            return inv;
        };
        return name == o.name && actions == o.actions && locations == o.locations &&
               initial == o.initial && clocks == o.clocks && params == o.params &&
               trimmed(*this) == trimmed(o) && edges == o.edges;
    }
};

// ── Valuations ──────────────────────────────────────────────────────────────

/// Assigns a non-negative integer to each parameter.
struct ParamValuation {
    std::map<std::string, long long> assignment;

    long long at(const std::string& p) const {
        auto it = assignment.find(p);
        if (it == assignment.end())
            throw std::out_of_range("parameter not valuated: " + p);
        return it->second;
    }
};

/// Assigns a non-negative rational to each clock.
struct ClockValuation {
    std::map<std::string, Rat> assignment;

    Rat at(const std::string& c) const {
        auto it = assignment.find(c);
        if (it == assignment.end())
            throw std::out_of_range("clock not valuated: " + c);
        return it->second;
    }
};

// ── Classification report ───────────────────────────────────────────────────

struct LuPartition {
    std::vector<std::string> lower;
    std::vector<std::string> upper;
};

struct ClassReport {
    int clock_count = 0;
    int param_count = 0;
    bool has_invariants = false;       // any invariant other than True
    bool has_constant_terms = false;   // any inequality with constant != 0
    std::optional<LuPartition> lu_partition;
    bool fully_parametric = false;
};

// ── validate ────────────────────────────────────────────────────────────────
// Returns an empty list iff all structural invariants hold; each diagnostic
// names the offending element.

namespace detail {

inline void check_expr(const LinearExpr& e, const GuardedPTA& m,
                       const std::string& where, std::vector<std::string>& out) {
    std::set<std::string> seen;
    for (const auto& [coef, p] : e.terms) {
        if (!m.has_param(p))
            out.push_back(where + ": undeclared parameter '" + p + "'");
        if (coef == 0)
            out.push_back(where + ": zero coefficient on parameter '" + p + "'");
        if (!seen.insert(p).second)
            out.push_back(where + ": duplicate parameter '" + p + "' in linear expression");
    }
}

inline void check_constraint(const Constraint& c, const GuardedPTA& m,
                             const std::string& where, std::vector<std::string>& out) {
    for (const auto& ineq : c.conjuncts) {
        if (!m.has_clock(ineq.clock))
            out.push_back(where + ": undeclared clock '" + ineq.clock + "'");
        check_expr(ineq.rhs, m, where, out);
    }
}

template <typename T>
inline void check_unique(const std::vector<T>& v, const std::string& kind,
                         std::vector<std::string>& out) {
    std::set<T> seen;
    for (const auto& x : v)
        if (!seen.insert(x).second)
            out.push_back("duplicate " + kind + " '" + x + "'");
}

}  // namespace detail

inline std::vector<std::string> validate(const GuardedPTA& m) {
    std::vector<std::string> out;
    detail::check_unique(m.locations, "location", out);
    detail::check_unique(m.clocks, "clock", out);
    detail::check_unique(m.params, "parameter", out);
    if (!m.has_location(m.initial))
        out.push_back("initial location '" + m.initial + "' is not declared");
    for (const auto& [loc, inv] : m.invariants) {
        if (!m.has_location(loc))
            out.push_back("invariant on undeclared location '" + loc + "'");
        detail::check_constraint(inv, m, "invariant of '" + loc + "'", out);
    }
    for (std::size_t k = 0; k < m.edges.size(); ++k) {
        const Edge& e = m.edges[k];
        const std::string where = "edge #" + std::to_string(k);
        if (!m.has_location(e.source))
            out.push_back(where + ": undeclared source location '" + e.source + "'");
        if (!m.has_location(e.target))
            out.push_back(where + ": undeclared target location '" + e.target + "'");
        if (e.locguard && !m.has_location(*e.locguard))
            out.push_back(where + ": undeclared location guard '" + *e.locguard + "'");
        if (!m.has_action(e.action))
            out.push_back(where + ": undeclared action '" + e.action + "'");
        for (const auto& c : e.resets)
            if (!m.has_clock(c))
                out.push_back(where + ": reset of undeclared clock '" + c + "'");
        detail::check_constraint(e.guard, m, where + " guard", out);
    }
    return out;
}

// ── classify ────────────────────────────────────────────────────────────────
// Lower/upper partition rules: a lower-bound parameter must occur with
// coefficient <= 0 in {<, <=} constraints and >= 0 in {>, >=} constraints;
// symmetrically for upper-bound parameters. An equality with a parametric
// term counts as both directions, so it rules the partition out.

inline ClassReport classify(const GuardedPTA& m) {
    {
        auto diags = validate(m);
        if (!diags.empty())
            throw std::invalid_argument("classify: model fails validation: " + diags.front());
    }
    ClassReport r;
    r.clock_count = static_cast<int>(m.clocks.size());
    r.param_count = static_cast<int>(m.params.size());

    std::map<std::string, bool> can_lower, can_upper;
    for (const auto& p : m.params) {
        can_lower[p] = true;
        can_upper[p] = true;
    }

    auto scan = [&](const Constraint& c) {
        for (const auto& ineq : c.conjuncts) {
            if (ineq.rhs.constant != 0) r.has_constant_terms = true;
            for (const auto& [coef, p] : ineq.rhs.terms) {
                bool lower_ok = false, upper_ok = false;
                switch (ineq.rel) {
                    case Rel::Lt:
                    case Rel::Le:
                        lower_ok = coef <= 0;
                        upper_ok = coef >= 0;
                        break;
                    case Rel::Ge:
                    case Rel::Gt:
                        lower_ok = coef >= 0;
                        upper_ok = coef <= 0;
                        break;
                    case Rel::Eq:
                        // both directions at once; a nonzero coefficient
                        // cannot satisfy them together
                        lower_ok = false;
                        upper_ok = false;
                        break;
                }
                if (!lower_ok) can_lower[p] = false;
                if (!upper_ok) can_upper[p] = false;
            }
        }
    };

    for (const auto& [loc, inv] : m.invariants) {
        if (!inv.is_true()) r.has_invariants = true;
        scan(inv);
    }
    for (const auto& e : m.edges) scan(e.guard);

    bool partitionable = true;
    LuPartition part;
    for (const auto& p : m.params) {
        if (can_lower[p]) {
            part.lower.push_back(p);
        } else if (can_upper[p]) {
            part.upper.push_back(p);
        } else {
            partitionable = false;
            break;
        }
    }
    if (partitionable) r.lu_partition = std::move(part);
    r.fully_parametric = !r.has_constant_terms;
    return r;
}

// ── valuate ─────────────────────────────────────────────────────────────────
// Substitutes every parameter occurrence; the result has an empty parameter
// list and all linear expressions collapsed to constants.

inline long long eval_expr(const LinearExpr& e, const ParamValuation& v) {
    long long acc = e.constant;
    for (const auto& [coef, p] : e.terms) acc += coef * v.at(p);
    return acc;
}

inline Constraint valuate(const Constraint& c, const ParamValuation& v) {
    Constraint out;
    out.conjuncts.reserve(c.conjuncts.size());
    for (const auto& ineq : c.conjuncts)
        out.conjuncts.push_back(
            Inequality{ineq.clock, ineq.rel, LinearExpr::constant_expr(eval_expr(ineq.rhs, v))});
    return out;
}

inline GuardedPTA valuate(const GuardedPTA& m, const ParamValuation& v) {
    for (const auto& p : m.params) v.at(p);  // missing parameter -> throw
    GuardedPTA out = m;
    out.params.clear();
    for (auto& [loc, inv] : out.invariants) inv = valuate(inv, v);
    for (auto& e : out.edges) e.guard = valuate(e.guard, v);
    return out;
}

// ── eval_constraint / reset ─────────────────────────────────────────────────

inline bool eval_inequality(const Rat& lhs, Rel rel, const Rat& rhs) {
    switch (rel) {
        case Rel::Lt: return lhs < rhs;
        case Rel::Le: return lhs <= rhs;
        case Rel::Eq: return lhs == rhs;
        case Rel::Ge: return lhs >= rhs;
        case Rel::Gt: return lhs > rhs;
    }
    return false;
}

inline bool eval_constraint(const Constraint& c, const ClockValuation& mu,
                            const ParamValuation& v) {
    for (const auto& ineq : c.conjuncts) {
        Rat rhs(eval_expr(ineq.rhs, v));
        if (!eval_inequality(mu.at(ineq.clock), ineq.rel, rhs)) return false;
    }
    return true;
}

inline ClockValuation reset(const ClockValuation& mu, const std::vector<std::string>& r) {
    ClockValuation out = mu;
    for (const auto& c : r) {
        auto it = out.assignment.find(c);
        if (it == out.assignment.end())
            throw std::out_of_range("reset of clock outside valuation domain: " + c);
        it->second = Rat(0);
    }
    return out;
}

}  // namespace pdtn

#endif  // PDTN_MODEL_HPP
