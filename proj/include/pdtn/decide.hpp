// ============================================================================
// pdtn/decide.hpp — parametrised reachability-emptiness procedures
// ============================================================================
//
// Dispatches a problem instance to the strongest applicable procedure:
//
//   * invariant-free networks: |L| is a cutoff, so one symbolic query at
//     n = |L| decides reachability over all network sizes (plus a descending
//     search for the minimal witness size);
//   * fully parametric models with one parameter: testing the valuations 0
//     and 1 suffices, every other value is a rescaling;
//   * lower/upper-partitioned models: valuate lower parameters with 0 and
//     delete the inequalities whose bound diverges when upper parameters
//     grow; a found witness is turned into a concrete valuation by bounding
//     upper parameters with D = T + |T'| + 1 (T the maximum clock value
//     along the witness, T' the smallest constant in the model) and
//     re-checked at that valuation;
//   * everything else: a bounded witness search over a valuation box and a
//     range of network sizes.
//
// Empty is only returned when one of the exact routes proves it; bounded
// searches that exhaust their box answer UnknownUpToBounds, never Empty.
//
// ============================================================================

#ifndef PDTN_DECIDE_HPP
#define PDTN_DECIDE_HPP

#include "pdtn/region.hpp"
#include "pdtn/zonereach.hpp"

#include <cstdlib>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdtn {

enum class Mode { PRe, PGRe };

struct ProblemInstance {
    GuardedPTA model;
    Mode mode = Mode::PRe;
    Goal goal;

    static ProblemInstance local(GuardedPTA m, std::string target) {
        return ProblemInstance{std::move(m), Mode::PRe, Goal::location(std::move(target))};
    }
    static ProblemInstance global(GuardedPTA m, PropertyAst phi) {
        return ProblemInstance{std::move(m), Mode::PGRe, Goal::prop(std::move(phi))};
    }
};

struct Bounds {
    int n_max = 4;
    long long p_max = 4;
    long long state_budget = 1'000'000;
};

struct Verdict {
    enum class Answer { Empty, NonEmpty, Unknown };
    Answer answer = Answer::Unknown;
    bool exact = false;  // theorem-backed, not bound-limited
    std::string method;
    std::optional<ParamValuation> valuation;  // NonEmpty only
    std::optional<int> n;                     // NonEmpty only
    std::optional<Trace> witness;             // NonEmpty only
    std::optional<Bounds> bounds;             // Unknown only
    long long explored = 0;
};

inline const char* verdict_answer_text(Verdict::Answer a) {
    switch (a) {
        case Verdict::Answer::Empty: return "empty";
        case Verdict::Answer::NonEmpty: return "nonempty";
        case Verdict::Answer::Unknown: return "unknown";
    }
    return "?";
}

struct BudgetExhausted : std::runtime_error {
    long long explored;
    explicit BudgetExhausted(long long e)
        : std::runtime_error("state budget exhausted"), explored(e) {}
};

namespace decidedetail {

inline bool invariant_free(const GuardedPTA& m) {
    for (const auto& l : m.locations)
        if (!m.invariant_of(l).is_true()) return false;
    return true;
}

/// The decision procedures run their symbolic queries with the process-order
/// canonicalization enabled: the networks are fully symmetric, the answers
/// are unchanged (differential-tested against the plain engine) and witness
/// steps keep their original process numbering.
inline ReachOptions search_opts(long long state_budget) {
    ReachOptions o;
    o.state_budget = state_budget;
    o.symmetry = true;
    return o;
}

inline void check_instance(const ProblemInstance& inst) {
    auto diags = validate(inst.model);
    if (!diags.empty())
        throw std::invalid_argument("instance model fails validation: " + diags.front());
    if (inst.mode == Mode::PRe && !inst.goal.target)
        throw std::invalid_argument("PR-e instance requires a target location");
    if (inst.mode == Mode::PGRe && !inst.goal.property)
        throw std::invalid_argument("PGR-e instance requires a global property");
    if (inst.goal.target && !inst.model.has_location(*inst.goal.target))
        throw std::invalid_argument("target location '" + *inst.goal.target + "' is not declared");
    if (inst.goal.property)
        for (const auto& l : inst.goal.property->mentioned_locations())
            if (!inst.model.has_location(l))
                throw std::invalid_argument("property names undeclared location '" + l + "'");
}

}  // namespace decidedetail

// ── Cutoff procedure for invariant-free DTNs ────────────────────────────────
// Without invariants a process that reaches a location can stay there and
// keep the guard enabled, so reachability for some network size coincides
// with reachability at n = |L|. After a hit, the minimal witness size is
// found by linear descent.

struct DtnResult {
    ReachStatus status = ReachStatus::Unreachable;
    int n = 0;                     // minimal witness size when Reachable
    std::optional<Trace> witness;  // present iff Reachable
    long long explored = 0;
};

inline DtnResult dtn_reach_no_invariants(const GuardedPTA& valuated, const Goal& goal,
                                         long long state_budget) {
    if (!valuated.params.empty())
        throw std::invalid_argument("dtn_reach_no_invariants: model still has parameters");
    if (!decidedetail::invariant_free(valuated))
        throw std::invalid_argument("dtn_reach_no_invariants: model has invariants");

    const int cutoff = static_cast<int>(valuated.locations.size());
    ReachOptions opts = decidedetail::search_opts(state_budget);

    DtnResult out;
    ReachResult r = reach(valuated, ParamValuation{}, cutoff, goal, opts);
    out.explored = r.explored;
    if (r.status == ReachStatus::BudgetExceeded) throw BudgetExhausted(out.explored);
    if (r.status == ReachStatus::Unreachable) {
        out.status = ReachStatus::Unreachable;
        return out;
    }
    out.status = ReachStatus::Reachable;
    out.n = cutoff;
    out.witness = r.witness;
    for (int nn = cutoff - 1; nn >= 1; --nn) {
        ReachResult rr = reach(valuated, ParamValuation{}, nn, goal, opts);
        out.explored += rr.explored;
        if (rr.status == ReachStatus::BudgetExceeded) throw BudgetExhausted(out.explored);
        if (rr.status != ReachStatus::Reachable) break;  // monotone in n
        out.n = nn;
        out.witness = rr.witness;
    }
    return out;
}

inline DtnResult dtn_reach_no_invariants(const GuardedPTA& valuated, const std::string& target,
                                         long long state_budget) {
    return dtn_reach_no_invariants(valuated, Goal::location(target), state_budget);
}

// ── Fully parametric models with a single parameter ─────────────────────────
// Reachability under any nonzero valuation rescales to valuation 1, so the
// two valuations 0 and 1 cover the whole parameter space.

inline Verdict pr_e_fully_parametric(const ProblemInstance& inst, const Bounds& bounds) {
    decidedetail::check_instance(inst);
    ClassReport report = classify(inst.model);
    if (!report.fully_parametric || report.param_count != 1)
        throw std::invalid_argument(
            "pr_e_fully_parametric: model is not fully parametric with one parameter");

    Verdict out;
    out.method = "fully-parametric";
    const std::string& p = inst.model.params.front();
    const bool exact_route = inst.mode == Mode::PRe && !report.has_invariants;

    for (long long val : {0LL, 1LL}) {
        ParamValuation v;
        v.assignment[p] = val;
        GuardedPTA concrete = valuate(inst.model, v);
        if (exact_route) {
            try {
                DtnResult r = dtn_reach_no_invariants(concrete, inst.goal, bounds.state_budget);
                out.explored += r.explored;
                if (r.status == ReachStatus::Reachable) {
                    out.answer = Verdict::Answer::NonEmpty;
                    out.exact = true;
                    out.valuation = v;
                    out.n = r.n;
                    out.witness = r.witness;
                    return out;
                }
            } catch (const BudgetExhausted& e) {
                out.explored += e.explored;
                out.answer = Verdict::Answer::Unknown;
                out.exact = false;
                out.bounds = bounds;
                return out;
            }
        } else {
            ReachOptions opts = decidedetail::search_opts(bounds.state_budget);
            for (int nn = 1; nn <= bounds.n_max; ++nn) {
                ReachResult r = reach(concrete, ParamValuation{}, nn, inst.goal, opts);
                out.explored += r.explored;
                if (r.status == ReachStatus::Reachable) {
                    out.answer = Verdict::Answer::NonEmpty;
                    out.exact = true;  // a concrete witness proves non-emptiness
                    out.valuation = v;
                    out.n = nn;
                    out.witness = r.witness;
                    return out;
                }
            }
        }
    }

    if (exact_route) {
        out.answer = Verdict::Answer::Empty;
        out.exact = true;
    } else {
        out.answer = Verdict::Answer::Unknown;
        out.exact = false;
        out.bounds = bounds;
    }
    return out;
}

// ── L/U models ──────────────────────────────────────────────────────────────

/// Valuates lower-bound parameters with 0 and deletes every inequality whose
/// bound diverges when upper-bound parameters grow: an upper parameter with
/// positive coefficient on a <=/< side, or with negative coefficient on a
/// >=/> side. The result is parameter-free.
inline GuardedPTA apply_lu_infinity(const GuardedPTA& m) {
    ClassReport report = classify(m);
    if (!report.lu_partition)
        throw std::invalid_argument("apply_lu_infinity: model has no lower/upper partition");
    std::set<std::string> upper(report.lu_partition->upper.begin(),
                                report.lu_partition->upper.end());

    auto transform = [&](const Constraint& c) {
        Constraint out;
        for (const auto& q : c.conjuncts) {
            bool deleted = false;
            for (const auto& [coef, p] : q.rhs.terms) {
                if (!upper.count(p)) continue;
                bool upper_side = (q.rel == Rel::Le || q.rel == Rel::Lt) && coef > 0;
                bool lower_side = (q.rel == Rel::Ge || q.rel == Rel::Gt) && coef < 0;
                if (upper_side || lower_side) {
                    deleted = true;
                    break;
                }
                throw std::logic_error(
                    "apply_lu_infinity: upper parameter with an incompatible sign");
            }
            if (!deleted)
                out.conjuncts.push_back(Inequality{
                    q.clock, q.rel, LinearExpr::constant_expr(q.rhs.constant)});
        }
        return out;
    };

    GuardedPTA out = m;
    out.params.clear();
    for (auto& [loc, inv] : out.invariants) inv = transform(inv);
    for (auto& e : out.edges) e.guard = transform(e.guard);
    return out;
}

namespace decidedetail {

/// Smallest and largest constant terms occurring in the model's guards and
/// invariants (both 0 when there is no inequality at all).
inline std::pair<long long, long long> constant_range(const GuardedPTA& m) {
    bool any = false;
    long long smallest = 0, largest = 0;
    auto scan = [&](const Constraint& c) {
        for (const auto& q : c.conjuncts) {
            if (!any || q.rhs.constant < smallest) smallest = q.rhs.constant;
            if (!any || q.rhs.constant > largest) largest = q.rhs.constant;
            any = true;
        }
    };
    for (const auto& [loc, inv] : m.invariants) scan(inv);
    for (const auto& e : m.edges) scan(e.guard);
    return {smallest, largest};
}

/// Concrete valuation certifying an infinity-valuated witness: lower
/// parameters 0, upper parameters D = T + |T'| + 1 + max(0, C), where T is
/// the maximum clock value along the witness, T' the smallest constant in
/// the model and C its largest constant. The T' term compensates negative
/// constants in deleted upper-bound inequalities; the C term is needed for
/// deleted *lower*-bound inequalities (x > -pu + d holds only once pu
/// outgrows d, which T + |T'| + 1 alone does not guarantee).
inline ParamValuation lu_concrete_valuation(const GuardedPTA& original, const LuPartition& part,
                                            const GuardedPTA& infinity_model, const Trace& tr,
                                            int n) {
    auto [total, max_clock] = extract_trace_time(tr, infinity_model, n);
    (void)total;
    auto [t_prime, c_max] = constant_range(original);
    long long d = rat_ceil(max_clock + Rat(std::llabs(t_prime)) + Rat(1) +
                           Rat(std::max<long long>(0, c_max)));
    ParamValuation v;
    for (const auto& p : part.lower) v.assignment[p] = 0;
    for (const auto& p : part.upper) v.assignment[p] = d;
    return v;
}

}  // namespace decidedetail

inline Verdict pr_e_lu(const ProblemInstance& inst, const Bounds& bounds) {
    decidedetail::check_instance(inst);
    ClassReport report = classify(inst.model);
    if (!report.lu_partition)
        throw std::invalid_argument("pr_e_lu: model has no lower/upper partition");

    GuardedPTA infinity_model = apply_lu_infinity(inst.model);
    Verdict out;
    out.method = "lu";

    ReachOptions opts = decidedetail::search_opts(bounds.state_budget);

    // a witness under the infinity valuation is certified by re-running the
    // query at the concrete valuation it induces; an unreachable re-run
    // contradicts the monotonicity argument and is a bug, while running out
    // of budget merely leaves the certificate unchecked
    auto certify = [&](const Trace& tr, int nn) {
        ParamValuation vstar = decidedetail::lu_concrete_valuation(
            inst.model, *report.lu_partition, infinity_model, tr, nn);
        ReachResult chk = reach(inst.model, vstar, nn, inst.goal, opts);
        out.explored += chk.explored;
        if (chk.status == ReachStatus::BudgetExceeded) {
            out.answer = Verdict::Answer::Unknown;
            out.exact = false;
            out.bounds = bounds;
            return;
        }
        if (chk.status != ReachStatus::Reachable || !chk.witness)
            throw std::logic_error("pr_e_lu: self-check failed at the concrete valuation");
        GuardedPTA concrete = valuate(inst.model, vstar);
        Configuration final_cfg = replay(*chk.witness, concrete, nn);
        if (!goal_holds(inst.goal, final_cfg, concrete))
            throw std::logic_error("pr_e_lu: certified witness does not reach the goal");
        out.answer = Verdict::Answer::NonEmpty;
        out.exact = true;
        out.valuation = vstar;
        out.n = nn;
        out.witness = chk.witness;
    };

    if (inst.mode == Mode::PRe && decidedetail::invariant_free(infinity_model)) {
        try {
            DtnResult r = dtn_reach_no_invariants(infinity_model, inst.goal, bounds.state_budget);
            out.explored += r.explored;
            if (r.status == ReachStatus::Unreachable) {
                out.answer = Verdict::Answer::Empty;
                out.exact = true;
                return out;
            }
            certify(*r.witness, r.n);
            return out;
        } catch (const BudgetExhausted& e) {
            out.explored += e.explored;
            out.answer = Verdict::Answer::Unknown;
            out.exact = false;
            out.bounds = bounds;
            return out;
        }
    }

    // invariants or a global property: the DTN query itself is out of reach,
    // fall back to a bounded witness search on the infinity-valuated model
    for (int nn = 1; nn <= bounds.n_max; ++nn) {
        ReachResult r = reach(infinity_model, ParamValuation{}, nn, inst.goal, opts);
        out.explored += r.explored;
        if (r.status == ReachStatus::Reachable) {
            certify(*r.witness, nn);
            return out;
        }
    }
    out.answer = Verdict::Answer::Unknown;
    out.exact = false;
    out.bounds = bounds;
    return out;
}

// ── Bounded semi-decision ───────────────────────────────────────────────────
// Enumerates valuations in the box [0, p_max]^|P| in lexicographic order and
// network sizes 1..n_max; the first hit proves non-emptiness. Exhaustion is
// UnknownUpToBounds, never Empty.

inline Verdict bounded_pr_e(const ProblemInstance& inst, const Bounds& bounds) {
    decidedetail::check_instance(inst);
    Verdict out;
    out.method = "bounded";

    ReachOptions opts = decidedetail::search_opts(bounds.state_budget);

    const std::size_t np = inst.model.params.size();
    std::vector<long long> vals(np, 0);
    bool done = false;
    while (!done) {
        ParamValuation v;
        for (std::size_t i = 0; i < np; ++i) v.assignment[inst.model.params[i]] = vals[i];
        for (int nn = 1; nn <= bounds.n_max; ++nn) {
            ReachResult r = reach(inst.model, v, nn, inst.goal, opts);
            out.explored += r.explored;
            if (r.status == ReachStatus::Reachable) {
                out.answer = Verdict::Answer::NonEmpty;
                out.exact = true;
                out.valuation = v;
                out.n = nn;
                out.witness = r.witness;
                return out;
            }
        }
        // next valuation, rightmost parameter fastest
        done = true;
        for (std::size_t i = np; i-- > 0;) {
            if (vals[i] < bounds.p_max) {
                ++vals[i];
                for (std::size_t j = i + 1; j < np; ++j) vals[j] = 0;
                done = false;
                break;
            }
        }
        if (np == 0) done = true;
    }

    out.answer = Verdict::Answer::Unknown;
    out.exact = false;
    out.bounds = bounds;
    return out;
}

// ── Dispatch ────────────────────────────────────────────────────────────────

inline Verdict solve(const ProblemInstance& inst, const Bounds& bounds) {
    decidedetail::check_instance(inst);
    ClassReport report = classify(inst.model);
    if (report.fully_parametric && report.param_count == 1)
        return pr_e_fully_parametric(inst, bounds);
    if (report.lu_partition) return pr_e_lu(inst, bounds);
    return bounded_pr_e(inst, bounds);
}

}  // namespace pdtn

#endif  // PDTN_DECIDE_HPP
