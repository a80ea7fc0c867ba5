// ============================================================================
// pdtn/region.hpp — region-graph reachability oracle
// ============================================================================
//
// Exact reachability for a valuated model over the n·|X| product clock set
// using the classical region construction: each clock keeps its integer part
// up to the maximum constant k (everything above k is one class), plus an
// ordering of the fractional parts. Location guards are evaluated on the
// discrete part of the state.
//
// The oracle exists to cross-check the zone engine and shares no code with
// it beyond the indexed model view. It is bounded by an explicit budget on
// stored states; BudgetExceeded is a value, not an error.
//
// ============================================================================

#ifndef PDTN_REGION_HPP
#define PDTN_REGION_HPP

#include "pdtn/semantics.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

namespace pdtn {

struct OracleResult {
    ReachStatus status = ReachStatus::Unreachable;
    long long explored = 0;
};

namespace regiondetail {

constexpr std::uint8_t kOmega = 0xff;  // clock value above the max constant

// One product clock inside a region: integer part (or kOmega) plus the rank
// of its fractional part. Rank 0 means fractional part zero; ranks 1..g are
// the nonzero fractional groups in increasing order, consecutive.
struct ClockClass {
    std::uint8_t cls = 0;
    std::uint8_t rank = 0;

    bool operator==(const ClockClass& o) const { return cls == o.cls && rank == o.rank; }
};

struct RegionState {
    std::vector<std::uint16_t> locs;
    std::vector<ClockClass> clocks;

    bool operator==(const RegionState& o) const { return locs == o.locs && clocks == o.clocks; }

    std::string key() const {
        std::string out;
        out.reserve(locs.size() * 2 + clocks.size() * 2);
        for (auto l : locs) {
            out.push_back(static_cast<char>(l & 0xff));
            out.push_back(static_cast<char>(l >> 8));
        }
        for (const auto& c : clocks) {
            out.push_back(static_cast<char>(c.cls));
            out.push_back(static_cast<char>(c.rank));
        }
        return out;
    }
};

// Compress nonzero fractional ranks to consecutive 1..g, preserving order.
inline void canonicalize_ranks(RegionState& r) {
    std::vector<std::uint8_t> present;
    for (const auto& c : r.clocks)
        if (c.cls != kOmega && c.rank > 0) present.push_back(c.rank);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    for (auto& c : r.clocks) {
        if (c.cls == kOmega || c.rank == 0) continue;
        auto it = std::lower_bound(present.begin(), present.end(), c.rank);
        c.rank = static_cast<std::uint8_t>(1 + (it - present.begin()));
    }
}

inline bool ineq_holds(const ClockClass& c, Rel rel, long long rhs, long long k) {
    // the caller guarantees |rhs| <= k, so kOmega (value > k) decides
    // every comparison
    (void)k;
    if (rhs < 0) return rel == Rel::Ge || rel == Rel::Gt;
    if (c.cls == kOmega) return rel == Rel::Ge || rel == Rel::Gt;
    long long i = c.cls;
    bool frac0 = c.rank == 0;
    switch (rel) {
        case Rel::Lt: return i < rhs;
        case Rel::Le: return i < rhs || (i == rhs && frac0);
        case Rel::Eq: return i == rhs && frac0;
        case Rel::Ge: return i >= rhs;
        case Rel::Gt: return i > rhs || (i == rhs && !frac0);
    }
    return false;
}

inline bool constraint_holds(const std::vector<CompiledIneq>& c, const RegionState& r,
                             int clock_base, long long k) {
    for (const auto& q : c)
        if (!ineq_holds(r.clocks[static_cast<std::size_t>(clock_base + q.clock)], q.rel, q.rhs, k))
            return false;
    return true;
}

inline bool invariants_hold(const CompiledModel& cm, const RegionState& r, int num_clocks,
                            long long k) {
    for (std::size_t i = 0; i < r.locs.size(); ++i)
        if (!constraint_holds(cm.invariants[r.locs[i]], r, static_cast<int>(i) * num_clocks, k))
            return false;
    return true;
}

// Immediate time successor; returns false when the region is its own
// successor (every clock above the max constant).
inline bool delay_successor(const RegionState& r, long long k, RegionState& out) {
    out = r;
    std::vector<std::size_t> zero_group;
    int max_rank = -1;
    bool any_bounded = false;
    for (std::size_t i = 0; i < out.clocks.size(); ++i) {
        const auto& c = out.clocks[i];
        if (c.cls == kOmega) continue;
        any_bounded = true;
        if (c.rank == 0)
            zero_group.push_back(i);
        else if (c.rank > max_rank)
            max_rank = c.rank;
    }
    if (!any_bounded) return false;

    if (!zero_group.empty()) {
        // integer-valued clocks pick up an infinitesimal fraction smaller
        // than every existing one
        for (auto& c : out.clocks)
            if (c.cls != kOmega && c.rank > 0)
                c.rank = static_cast<std::uint8_t>(c.rank + 1);
        for (std::size_t i : zero_group) {
            auto& c = out.clocks[i];
            if (c.cls >= k)
                c = ClockClass{kOmega, 0};
            else
                c.rank = 1;
        }
    } else {
        // the largest fractional group reaches the next integer
        for (auto& c : out.clocks) {
            if (c.cls == kOmega || c.rank != max_rank) continue;
            if (c.cls + 1 > k)
                c = ClockClass{kOmega, 0};
            else
                c = ClockClass{static_cast<std::uint8_t>(c.cls + 1), 0};
        }
    }
    canonicalize_ranks(out);
    return true;
}

}  // namespace regiondetail

/// Exact answer whenever the reachable region graph fits in `state_budget`
/// stored states. Granularity is the maximum absolute constant of the
/// valuated model.
inline OracleResult region_reach_oracle(const GuardedPTA& m, int n, const Goal& goal,
                                        long long state_budget) {
    using namespace regiondetail;
    CompiledModel cm = compile_model(m);
    CompiledGoal cg = compile_goal(goal, cm);
    const long long k = std::max<long long>(1, cm.max_abs_const);
    const int X = cm.num_clocks;

    RegionState init;
    init.locs.assign(static_cast<std::size_t>(n), static_cast<std::uint16_t>(cm.initial));
    init.clocks.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(X), ClockClass{});

    OracleResult res;
    if (!invariants_hold(cm, init, X, k)) {
        res.status = ReachStatus::Unreachable;
        return res;
    }

    auto locs_of = [](const RegionState& r) {
        std::vector<int> ls(r.locs.begin(), r.locs.end());
        return ls;
    };
    if (cg.eval(locs_of(init))) {
        res.status = ReachStatus::Reachable;
        res.explored = 1;
        return res;
    }

    std::unordered_set<std::string> seen;
    std::deque<RegionState> queue;
    seen.insert(init.key());
    queue.push_back(init);

    auto push = [&](RegionState&& s) -> int {
        // 0 = stored, 1 = duplicate, 2 = goal hit, 3 = budget blown
        auto key = s.key();
        if (seen.count(key)) return 1;
        if (cg.eval(locs_of(s))) return 2;
        if (static_cast<long long>(seen.size()) >= state_budget) return 3;
        seen.insert(std::move(key));
        queue.push_back(std::move(s));
        return 0;
    };

    while (!queue.empty()) {
        RegionState cur = std::move(queue.front());
        queue.pop_front();

        RegionState next;
        if (delay_successor(cur, k, next) && invariants_hold(cm, next, X, k)) {
            int rc = push(std::move(next));
            if (rc == 2 || rc == 3) {
                res.status = rc == 2 ? ReachStatus::Reachable : ReachStatus::BudgetExceeded;
                res.explored = static_cast<long long>(seen.size());
                return res;
            }
        }

        for (int i = 0; i < n; ++i) {
            int loc = cur.locs[static_cast<std::size_t>(i)];
            for (int ek : cm.edges_from[loc]) {
                const CompiledEdge& e = cm.edges[static_cast<std::size_t>(ek)];
                if (e.locguard >= 0) {
                    bool witness = false;
                    for (int j = 0; j < n; ++j)
                        if (j != i && cur.locs[static_cast<std::size_t>(j)] == e.locguard) {
                            witness = true;
                            break;
                        }
                    if (!witness) continue;
                }
                if (!constraint_holds(e.guard, cur, i * X, k)) continue;
                RegionState succ = cur;
                succ.locs[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(e.target);
                for (int c : e.resets)
                    succ.clocks[static_cast<std::size_t>(i * X + c)] = ClockClass{0, 0};
                canonicalize_ranks(succ);
                if (!constraint_holds(cm.invariants[e.target], succ, i * X, k)) continue;
                int rc = push(std::move(succ));
                if (rc == 2 || rc == 3) {
                    res.status = rc == 2 ? ReachStatus::Reachable : ReachStatus::BudgetExceeded;
                    res.explored = static_cast<long long>(seen.size());
                    return res;
                }
            }
        }
    }

    res.status = ReachStatus::Unreachable;
    res.explored = static_cast<long long>(seen.size());
    return res;
}

}  // namespace pdtn

#endif  // PDTN_REGION_HPP
