// ============================================================================
// pdtn/rational.hpp — exact rational time values
// ============================================================================
//
// Clock valuations and trace delays use exact rational arithmetic so that
// boundary guards (x = c) stay decidable. Backed by boost::rational.
//
// ============================================================================

#ifndef PDTN_RATIONAL_HPP
#define PDTN_RATIONAL_HPP

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdtn {

using Rat = boost::rational<long long>;

inline std::string rat_to_string(const Rat& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Parses "a" or "a/b". Throws std::invalid_argument on malformed input
/// or zero denominator.
inline Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            return Rat(std::stoll(s));
        }
        long long num = std::stoll(s.substr(0, slash));
        long long den = std::stoll(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rat(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed rational: '" + s + "'");
    }
}

/// Smallest integer >= r.
inline long long rat_ceil(const Rat& r) {
    long long q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && r.numerator() > 0) ++q;
    return q;
}

}  // namespace pdtn

#endif  // PDTN_RATIONAL_HPP
