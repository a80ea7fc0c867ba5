// ============================================================================
// pdtn/dbm.hpp — difference-bound matrices over the product clock set
// ============================================================================
//
// Square matrix of bounds on clock differences x_i − x_j, index 0 being the
// reference clock (constant 0). Entries are (value, strict) pairs or +∞;
// canonical form via all-pairs shortest paths. Bounds are encoded in the
// usual raw form  value·2 + (1 if non-strict)  so that tighter-than is plain
// integer comparison and bound addition is one arithmetic expression.
//
// ============================================================================

#ifndef PDTN_DBM_HPP
#define PDTN_DBM_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdtn {

// ── Bounds ──────────────────────────────────────────────────────────────────

struct DbmBound {
    long long value = 0;
    bool strict = false;
};

namespace dbmraw {

using raw_t = long long;

constexpr raw_t kInf = std::numeric_limits<long long>::max() / 4;
constexpr raw_t kLeZero = 1;  // (0, <=)

inline raw_t make(long long value, bool strict) { return value * 2 + (strict ? 0 : 1); }
inline long long value_of(raw_t r) {
    // arithmetic shift keeps negative bounds intact
    return r >> 1;
}
inline bool strict_of(raw_t r) { return (r & 1) == 0; }

inline raw_t add(raw_t a, raw_t b) {
    if (a >= kInf || b >= kInf) return kInf;
    return a + b - ((a | b) & 1);
}

}  // namespace dbmraw

// ── Dbm ─────────────────────────────────────────────────────────────────────

class Dbm {
public:
    explicit Dbm(int dim) : dim_(dim), m_(static_cast<std::size_t>(dim) * dim, dbmraw::kInf) {
        if (dim < 1) throw std::invalid_argument("Dbm: dimension must be >= 1");
        for (int i = 0; i < dim; ++i) raw_at(i, i) = dbmraw::kLeZero;
    }

    /// All clocks equal to zero.
    static Dbm zero(int dim) {
        Dbm d(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) d.raw_at(i, j) = dbmraw::kLeZero;
        return d;
    }

    /// All clocks non-negative, otherwise unconstrained.
    static Dbm universe(int dim) {
        Dbm d(dim);
        for (int j = 1; j < dim; ++j) d.raw_at(0, j) = dbmraw::kLeZero;  // 0 - x_j <= 0
        return d;
    }

    int dim() const { return dim_; }

    bool is_inf(int i, int j) const { return raw_at(i, j) >= dbmraw::kInf; }

    DbmBound at(int i, int j) const {
        auto r = raw_at(i, j);
        return DbmBound{dbmraw::value_of(r), dbmraw::strict_of(r)};
    }

    void set(int i, int j, long long value, bool strict) {
        raw_at(i, j) = dbmraw::make(value, strict);
    }
    void set_inf(int i, int j) { raw_at(i, j) = dbmraw::kInf; }

    /// Intersect with  x_i − x_j ≺ value; does not re-canonicalize.
    void tighten(int i, int j, long long value, bool strict) {
        auto r = dbmraw::make(value, strict);
        if (r < raw_at(i, j)) raw_at(i, j) = r;
    }

    /// Delay closure: drop the upper bounds on clock − reference differences.
    void up() {
        for (int i = 1; i < dim_; ++i) raw_at(i, 0) = dbmraw::kInf;
    }

    /// Reset clock x to 0 (x >= 1). Preserves canonical form.
    void reset_clock(int x) {
        for (int j = 0; j < dim_; ++j) {
            raw_at(x, j) = raw_at(0, j);
            raw_at(j, x) = raw_at(j, 0);
        }
        raw_at(x, x) = dbmraw::kLeZero;
    }

    /// All-pairs shortest paths; afterwards empty() is meaningful. A
    /// negative cycle collapses the matrix to one canonical empty form, so
    /// canonicalize is idempotent on empty zones too.
    void canonicalize() {
        for (int k = 0; k < dim_; ++k)
            for (int i = 0; i < dim_; ++i) {
                auto dik = raw_at(i, k);
                if (dik >= dbmraw::kInf) continue;
                for (int j = 0; j < dim_; ++j) {
                    auto via = dbmraw::add(dik, raw_at(k, j));
                    if (via < raw_at(i, j)) raw_at(i, j) = via;
                }
            }
        for (int i = 0; i < dim_; ++i) {
            if (raw_at(i, i) < dbmraw::kLeZero) {
                std::fill(m_.begin(), m_.end(), dbmraw::make(-1, true));
                return;
            }
        }
    }

    /// Requires canonical form: any negative diagonal entry marks emptiness.
    bool empty() const {
        for (int i = 0; i < dim_; ++i)
            if (raw_at(i, i) < dbmraw::kLeZero) return true;
        return false;
    }

    /// other ⊆ this, both canonical.
    bool includes(const Dbm& other) const {
        if (other.dim_ != dim_) throw std::invalid_argument("Dbm::includes: dimension mismatch");
        for (std::size_t k = 0; k < m_.size(); ++k)
            if (other.m_[k] > m_[k]) return false;
        return true;
    }

    /// Max-constant normalization with constant k; guarantees finitely many
    /// distinct matrices. Re-canonicalizes.
    void extrapolate(long long k) {
        const auto hi = dbmraw::make(k, false);
        const auto lo = dbmraw::make(-k, true);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                if (i == j) continue;
                auto& r = raw_at(i, j);
                if (r >= dbmraw::kInf) continue;
                if (r > hi)
                    r = dbmraw::kInf;
                else if (r < lo)
                    r = lo;
            }
        canonicalize();
    }

    bool operator==(const Dbm& o) const { return dim_ == o.dim_ && m_ == o.m_; }

    /// Lexicographic order on the raw entries; used as a canonicalization
    /// tie-break, not a geometric relation.
    bool raw_less(const Dbm& o) const { return m_ < o.m_; }

    /// Bitmask of +∞ entries (first 64 cells). Inclusion requires the
    /// smaller zone's mask to be a subset of the larger one's, giving a
    /// cheap pre-filter for includes().
    std::uint64_t inf_mask() const {
        std::uint64_t mask = 0;
        const std::size_t top = m_.size() < 64 ? m_.size() : 64;
        for (std::size_t i = 0; i < top; ++i)
            if (m_[i] >= dbmraw::kInf) mask |= (1ULL << i);
        return mask;
    }

    std::size_t hash() const {
        std::size_t h = std::hash<int>()(dim_);
        for (auto r : m_) h = h * 1099511628211ULL + std::hash<long long>()(r);
        return h;
    }

    /// Row/column permutation: entry (i, j) of the result is entry
    /// (perm[i], perm[j]) of the input; perm[0] must be 0.
    Dbm permuted(const std::vector<int>& perm) const {
        Dbm out(dim_);
        permute_into(perm, out);
        return out;
    }

    void permute_into(const std::vector<int>& perm, Dbm& out) const {
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) out.raw_at(i, j) = raw_at(perm[i], perm[j]);
    }

    std::string to_string() const {
        std::string out;
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < dim_; ++j) {
                if (is_inf(i, j)) {
                    out += "inf ";
                } else {
                    auto b = at(i, j);
                    out += (b.strict ? "<" : "<=") + std::to_string(b.value) + " ";
                }
            }
            out += "\n";
        }
        return out;
    }

private:
    dbmraw::raw_t& raw_at(int i, int j) {
        return m_[static_cast<std::size_t>(i) * dim_ + j];
    }
    const dbmraw::raw_t& raw_at(int i, int j) const {
        return m_[static_cast<std::size_t>(i) * dim_ + j];
    }

    int dim_;
    std::vector<dbmraw::raw_t> m_;
};

}  // namespace pdtn

#endif  // PDTN_DBM_HPP
