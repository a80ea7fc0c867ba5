// ============================================================================
// pdtn/zonereach.hpp — symbolic reachability over DBM zones
// ============================================================================
//
// Exact reachability for a fixed parameter valuation and fixed network size.
// Symbolic states pair a location vector with a canonical zone over the
// n·|X| product clocks; exploration is BFS with a deterministic successor
// order (process index, then edge index) and inclusion subsumption, so
// witnesses are reproducible and shortest in discrete steps.
//
// A Reachable result carries a replayable trace: the discrete skeleton comes
// from the BFS parent chain, and concrete rational delays are recovered by a
// feasibility pass over the path (a difference-constraint system over the
// per-step firing times).
//
// ============================================================================

#ifndef PDTN_ZONEREACH_HPP
#define PDTN_ZONEREACH_HPP

#include "pdtn/dbm.hpp"
#include "pdtn/semantics.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace pdtn {

struct ReachOptions {
    long long state_budget = 1'000'000;
    bool subsumption = true;
    bool symmetry = false;  // canonical process order; off by default
    std::optional<long long> extrapolation_const;
};

struct ReachResult {
    ReachStatus status = ReachStatus::Unreachable;
    std::optional<Trace> witness;  // present iff Reachable
    long long explored = 0;        // stored symbolic states
};

namespace zonedetail {

// product clock index of (process, clock); 0 is the reference clock
inline int clock_var(int proc, int clock, int num_clocks) {
    return 1 + proc * num_clocks + clock;
}

inline void constrain_point(Dbm& z, int var, Rel rel, long long rhs) {
    switch (rel) {
        case Rel::Lt: z.tighten(var, 0, rhs, true); break;
        case Rel::Le: z.tighten(var, 0, rhs, false); break;
        case Rel::Ge: z.tighten(0, var, -rhs, false); break;
        case Rel::Gt: z.tighten(0, var, -rhs, true); break;
        case Rel::Eq:
            z.tighten(var, 0, rhs, false);
            z.tighten(0, var, -rhs, false);
            break;
    }
}

inline void constrain(Dbm& z, const std::vector<CompiledIneq>& c, int proc, int num_clocks) {
    for (const auto& q : c) constrain_point(z, clock_var(proc, q.clock, num_clocks), q.rel, q.rhs);
}

// ── Witness timing ──────────────────────────────────────────────────────────
// Given the discrete skeleton (process identity, edge index)*, recover
// admissible rational delays. Variables are the absolute firing times
// T_1..T_m with T_0 = 0; guards, invariant entry checks and invariant
// upper-bound closures all become difference constraints. A non-empty
// system yields a point with denominator m+2 via uniform scaling.

inline Trace timed_witness(const CompiledModel& cm, int n,
                           const std::vector<std::pair<int, int>>& steps) {
    const int m = static_cast<int>(steps.size());
    const int X = cm.num_clocks;
    Dbm t = Dbm::universe(m + 1);
    for (int j = 1; j <= m; ++j) t.tighten(j - 1, j, 0, false);  // T_{j-1} <= T_j

    // value(x) rel K at time var `when`, where `resetvar` is the variable of
    // the clock's last reset
    auto atom = [&](int when, int resetvar, Rel rel, long long K) {
        switch (rel) {
            case Rel::Lt: t.tighten(when, resetvar, K, true); break;
            case Rel::Le: t.tighten(when, resetvar, K, false); break;
            case Rel::Ge: t.tighten(resetvar, when, -K, false); break;
            case Rel::Gt: t.tighten(resetvar, when, -K, true); break;
            case Rel::Eq:
                t.tighten(when, resetvar, K, false);
                t.tighten(resetvar, when, -K, false);
                break;
        }
    };
    auto zero_ok = [](Rel rel, long long K) {
        switch (rel) {
            case Rel::Lt: return 0 < K;
            case Rel::Le: return 0 <= K;
            case Rel::Eq: return K == 0;
            case Rel::Ge: return 0 >= K;
            case Rel::Gt: return 0 > K;
        }
        return false;
    };

    std::vector<int> loc(static_cast<std::size_t>(n), cm.initial);
    std::vector<int> last_reset(static_cast<std::size_t>(n) * X, 0);

    for (int p = 0; p < n; ++p)
        for (const auto& q : cm.invariants[cm.initial])
            if (!zero_ok(q.rel, q.rhs))
                throw std::logic_error("witness timing: initial invariant rejects zero");

    for (int j = 1; j <= m; ++j) {
        auto [who, ek] = steps[static_cast<std::size_t>(j - 1)];
        const CompiledEdge& e = cm.edges[static_cast<std::size_t>(ek)];
        if (loc[static_cast<std::size_t>(who)] != e.source)
            throw std::logic_error("witness timing: discrete skeleton is inconsistent");

        auto lr = [&](int c) { return last_reset[static_cast<std::size_t>(who * X + c)]; };

        for (const auto& q : e.guard) atom(j, lr(q.clock), q.rel, q.rhs);
        // source invariant upper bounds must survive the delay up to T_j
        for (const auto& q : cm.invariants[e.source])
            if (q.rel == Rel::Le || q.rel == Rel::Lt || q.rel == Rel::Eq)
                atom(j, lr(q.clock), q.rel == Rel::Eq ? Rel::Le : q.rel, q.rhs);

        for (int c : e.resets) last_reset[static_cast<std::size_t>(who * X + c)] = j;
        loc[static_cast<std::size_t>(who)] = e.target;

        // full target invariant at entry, on the post-reset values
        for (const auto& q : cm.invariants[e.target]) {
            bool was_reset = false;
            for (int c : e.resets)
                if (c == q.clock) was_reset = true;
            if (was_reset) {
                if (!zero_ok(q.rel, q.rhs))
                    throw std::logic_error("witness timing: target invariant rejects reset");
            } else {
                atom(j, lr(q.clock), q.rel, q.rhs);
            }
        }
    }

    // invariant upper bounds of every process's final location hold at T_m
    for (int p = 0; p < n; ++p)
        for (const auto& q : cm.invariants[loc[static_cast<std::size_t>(p)]])
            if (q.rel == Rel::Le || q.rel == Rel::Lt || q.rel == Rel::Eq)
                atom(m, last_reset[static_cast<std::size_t>(p * X + q.clock)],
                     q.rel == Rel::Eq ? Rel::Le : q.rel, q.rhs);

    t.canonicalize();
    if (t.empty()) throw std::logic_error("witness timing: infeasible discrete skeleton");

    // scale by q so that some representative becomes integral, turn strict
    // bounds into closed integer bounds, then fix variables at their lower
    // bounds in order
    const long long q = m + 2;
    Dbm s(m + 1);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            if (i == j) continue;
            if (t.is_inf(i, j)) continue;
            auto b = t.at(i, j);
            long long v = b.value * q - (b.strict ? 1 : 0);
            s.set(i, j, v, false);
        }
    s.canonicalize();
    if (s.empty()) throw std::logic_error("witness timing: scaled system infeasible");

    std::vector<long long> fire(static_cast<std::size_t>(m + 1), 0);
    for (int j = 1; j <= m; ++j) {
        long long lo = -s.at(0, j).value;  // 0 - T_j <= c  =>  T_j >= -c
        s.tighten(j, 0, lo, false);
        s.tighten(0, j, -lo, false);
        s.canonicalize();
        if (s.empty()) throw std::logic_error("witness timing: variable fixing failed");
        fire[static_cast<std::size_t>(j)] = lo;
    }

    Trace out;
    for (int j = 1; j <= m; ++j) {
        Rat d(fire[static_cast<std::size_t>(j)] - fire[static_cast<std::size_t>(j - 1)], q);
        if (d > Rat(0)) out.steps.push_back(TimedStep::make_delay(d));
        auto [who, ek] = steps[static_cast<std::size_t>(j - 1)];
        out.steps.push_back(TimedStep::make_discrete(who + 1, ek));
    }
    return out;
}

}  // namespace zonedetail

// ── reach ───────────────────────────────────────────────────────────────────

inline ReachResult reach(const GuardedPTA& model, const ParamValuation& v, int n,
                         const Goal& goal, const ReachOptions& opts = {}) {
    if (n < 1) throw std::invalid_argument("reach: network size must be >= 1");
    GuardedPTA valuated = model.params.empty() ? model : valuate(model, v);
    CompiledModel cm = compile_model(valuated);
    CompiledGoal cg = compile_goal(goal, cm);
    const int X = cm.num_clocks;
    const int dim = n * X + 1;
    const long long k = opts.extrapolation_const.value_or(cm.max_abs_const);

    // location-name order for the optional process canonicalization
    std::vector<int> name_rank(static_cast<std::size_t>(cm.num_locations), 0);
    {
        std::vector<int> ids(static_cast<std::size_t>(cm.num_locations));
        for (int i = 0; i < cm.num_locations; ++i) ids[static_cast<std::size_t>(i)] = i;
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            return valuated.locations[static_cast<std::size_t>(a)] <
                   valuated.locations[static_cast<std::size_t>(b)];
        });
        for (int r = 0; r < cm.num_locations; ++r) name_rank[static_cast<std::size_t>(ids[r])] = r;
    }

    struct Node {
        std::vector<int> locs;
        Dbm zone{1};
        int parent = -1;
        int step_proc = -1;  // process identity, 0-based
        int step_edge = -1;
        std::vector<std::uint8_t> ident;  // slot -> process identity
        bool covered = false;             // replaced by a larger stored zone
    };
    struct BucketEntry {
        std::size_t zone_hash;
        std::uint64_t inf_mask;
        int id;
    };
    struct LocsHash {
        std::size_t operator()(const std::vector<int>& v) const {
            std::size_t h = 0x9e3779b97f4a7c15ULL;
            for (int x : v) h = h * 1099511628211ULL + static_cast<std::size_t>(x);
            return h;
        }
    };
    std::vector<Node> arena;
    std::unordered_map<std::vector<int>, std::vector<BucketEntry>, LocsHash> passed;
    std::deque<int> queue;

    ReachResult res;

    // Processes are interchangeable, so states that differ only by process
    // order are merged: slots are sorted by location name, and slots sharing
    // a location are ordered so that the permuted DBM is raw-minimal. The
    // slot -> identity map keeps witness steps phrased in terms of the
    // original process numbering.
    auto canonical_order = [&](std::vector<int>& locs, std::vector<std::uint8_t>& ident,
                               Dbm& zone) {
        if (!opts.symmetry) return;
        std::vector<int> slots(locs.size());
        for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<int>(i);
        std::stable_sort(slots.begin(), slots.end(), [&](int a, int b) {
            return name_rank[static_cast<std::size_t>(locs[static_cast<std::size_t>(a)])] <
                   name_rank[static_cast<std::size_t>(locs[static_cast<std::size_t>(b)])];
        });

        std::vector<int> perm(static_cast<std::size_t>(dim));
        auto apply_into = [&](const std::vector<int>& order, Dbm& out) {
            perm[0] = 0;
            for (std::size_t t = 0; t < order.size(); ++t)
                for (int c = 0; c < X; ++c)
                    perm[static_cast<std::size_t>(
                        zonedetail::clock_var(static_cast<int>(t), c, X))] =
                        zonedetail::clock_var(order[t], c, X);
            zone.permute_into(perm, out);
        };

        std::vector<int> best_order = slots;
        Dbm best(dim), cand(dim);
        apply_into(slots, best);

        bool has_run = false;
        for (std::size_t i = 1; i < slots.size(); ++i)
            if (locs[static_cast<std::size_t>(slots[i])] ==
                locs[static_cast<std::size_t>(slots[i - 1])])
                has_run = true;
        if (has_run) {
            // enumerate permutations within each equal-location run and keep
            // the raw-minimal permuted zone
            std::function<void(std::size_t)> explore = [&](std::size_t start) {
                if (start >= slots.size()) {
                    apply_into(slots, cand);
                    if (cand.raw_less(best)) {
                        std::swap(best, cand);
                        best_order = slots;
                    }
                    return;
                }
                std::size_t end = start + 1;
                while (end < slots.size() &&
                       locs[static_cast<std::size_t>(slots[end])] ==
                           locs[static_cast<std::size_t>(slots[start])])
                    ++end;
                if (end - start <= 1) {
                    explore(end);
                    return;
                }
                std::vector<int> run(slots.begin() + static_cast<long>(start),
                                     slots.begin() + static_cast<long>(end));
                std::sort(run.begin(), run.end());
                do {
                    std::copy(run.begin(), run.end(), slots.begin() + static_cast<long>(start));
                    explore(end);
                } while (std::next_permutation(run.begin(), run.end()));
            };
            explore(0);
        }

        std::vector<int> new_locs(locs.size());
        std::vector<std::uint8_t> new_ident(ident.size());
        for (std::size_t t = 0; t < best_order.size(); ++t) {
            new_locs[t] = locs[static_cast<std::size_t>(best_order[t])];
            new_ident[t] = ident[static_cast<std::size_t>(best_order[t])];
        }
        locs = std::move(new_locs);
        ident = std::move(new_ident);
        zone = std::move(best);
    };

    auto witness_of = [&](int final_parent, int who, int ek) {
        std::vector<std::pair<int, int>> steps;
        if (who >= 0) steps.emplace_back(who, ek);
        for (int at = final_parent; at >= 0; at = arena[static_cast<std::size_t>(at)].parent) {
            const Node& nd = arena[static_cast<std::size_t>(at)];
            if (nd.step_proc >= 0) steps.emplace_back(nd.step_proc, nd.step_edge);
        }
        std::reverse(steps.begin(), steps.end());
        return zonedetail::timed_witness(cm, n, steps);
    };

    // 0 = stored, 1 = subsumed/duplicate, 2 = goal, 3 = budget
    auto push = [&](Node&& nd) -> int {
        if (cg.eval(nd.locs)) return 2;
        auto& bucket = passed[nd.locs];
        const std::size_t h = nd.zone.hash();
        const std::uint64_t mask = nd.zone.inf_mask();
        for (const auto& e : bucket) {
            const Node& stored = arena[static_cast<std::size_t>(e.id)];
            if (e.zone_hash == h && stored.zone == nd.zone) return 1;
            // stored ⊇ new needs the new zone's ∞ cells to be ∞ in stored
            if (opts.subsumption && !stored.covered && (mask & ~e.inf_mask) == 0 &&
                stored.zone.includes(nd.zone))
                return 1;
        }
        if (static_cast<long long>(arena.size()) >= opts.state_budget) return 3;
        if (opts.subsumption) {
            // the new zone may cover stored ones: retire them
            auto keep = bucket.begin();
            for (auto it = bucket.begin(); it != bucket.end(); ++it) {
                Node& stored = arena[static_cast<std::size_t>(it->id)];
                if (!stored.covered && (it->inf_mask & ~mask) == 0 &&
                    nd.zone.includes(stored.zone)) {
                    stored.covered = true;
                    continue;
                }
                *keep++ = *it;
            }
            bucket.erase(keep, bucket.end());
        }
        int id = static_cast<int>(arena.size());
        arena.push_back(std::move(nd));
        bucket.push_back(BucketEntry{h, mask, id});
        queue.push_back(id);
        return 0;
    };

    // initial symbolic state: all processes at the initial location, zero
    // clocks, delay-closed under the invariants
    {
        Node init;
        init.locs.assign(static_cast<std::size_t>(n), cm.initial);
        init.ident.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) init.ident[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
        Dbm z = Dbm::zero(dim);
        for (int p = 0; p < n; ++p) zonedetail::constrain(z, cm.invariants[cm.initial], p, X);
        z.canonicalize();
        if (z.empty()) {
            res.status = ReachStatus::Unreachable;
            return res;
        }
        if (cg.eval(init.locs)) {
            res.status = ReachStatus::Reachable;
            res.witness = Trace{};
            res.explored = 0;
            return res;
        }
        z.up();
        for (int p = 0; p < n; ++p) zonedetail::constrain(z, cm.invariants[cm.initial], p, X);
        z.canonicalize();
        z.extrapolate(k);
        init.zone = std::move(z);
        canonical_order(init.locs, init.ident, init.zone);
        push(std::move(init));
    }

    while (!queue.empty()) {
        int cur_id = queue.front();
        queue.pop_front();
        if (arena[static_cast<std::size_t>(cur_id)].covered) continue;

        for (int s = 0; s < n; ++s) {
            int src = arena[static_cast<std::size_t>(cur_id)].locs[static_cast<std::size_t>(s)];
            for (int ek : cm.edges_from[src]) {
                const Node& cur = arena[static_cast<std::size_t>(cur_id)];
                const CompiledEdge& e = cm.edges[static_cast<std::size_t>(ek)];
                if (e.locguard >= 0) {
                    bool witness = false;
                    for (int t = 0; t < n; ++t)
                        if (t != s && cur.locs[static_cast<std::size_t>(t)] == e.locguard) {
                            witness = true;
                            break;
                        }
                    if (!witness) continue;
                }
                Dbm z = cur.zone;
                zonedetail::constrain(z, e.guard, s, X);
                z.canonicalize();
                if (z.empty()) continue;
                for (int c : e.resets) z.reset_clock(zonedetail::clock_var(s, c, X));
                zonedetail::constrain(z, cm.invariants[e.target], s, X);
                z.canonicalize();
                if (z.empty()) continue;
                z.up();
                for (int p = 0; p < n; ++p) {
                    int l = p == s ? e.target : cur.locs[static_cast<std::size_t>(p)];
                    zonedetail::constrain(z, cm.invariants[l], p, X);
                }
                z.canonicalize();
                z.extrapolate(k);

                Node nd;
                nd.locs = cur.locs;
                nd.locs[static_cast<std::size_t>(s)] = e.target;
                nd.ident = cur.ident;
                nd.parent = cur_id;
                nd.step_proc = cur.ident[static_cast<std::size_t>(s)];
                nd.step_edge = ek;
                nd.zone = std::move(z);
                canonical_order(nd.locs, nd.ident, nd.zone);
                int who = nd.step_proc;
                int rc = push(std::move(nd));
                if (rc == 2) {
                    res.status = ReachStatus::Reachable;
                    res.witness = witness_of(cur_id, who, ek);
                    res.explored = static_cast<long long>(arena.size());
                    return res;
                }
                if (rc == 3) {
                    res.status = ReachStatus::BudgetExceeded;
                    res.explored = static_cast<long long>(arena.size());
                    return res;
                }
            }
        }
    }

    res.status = ReachStatus::Unreachable;
    res.explored = static_cast<long long>(arena.size());
    return res;
}

// ── extract_trace_time ──────────────────────────────────────────────────────
// Total duration and maximum clock value attained along a replayable trace.

inline std::pair<Rat, Rat> extract_trace_time(const Trace& t, const GuardedPTA& valuated_model,
                                              int n) {
    return trace_time_stats(t, valuated_model, n);
}

}  // namespace pdtn

#endif  // PDTN_ZONEREACH_HPP
