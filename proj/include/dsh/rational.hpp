/* dsh/rational.hpp — exact rational arithmetic on the unit circle ℝ/ℤ.
 *
 * The dynamics module does all orbit arithmetic exactly: points of the
 * circle are rationals in [0, 1), rotation is addition mod 1, and arcs are
 * closed intervals with rational endpoints. Every identity asserted there
 * (tower tilings, return-time partitions) is an exact equality of
 * rationals, never a float comparison.
 */
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "dsh/errors.hpp"

namespace dsh {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// @brief Canonical representative of x in [0, 1).
inline Rat mod1(const Rat& x) {
    const BigInt num = boost::multiprecision::numerator(x);
    const BigInt den = boost::multiprecision::denominator(x); // den > 0 in canonical form
    BigInt q = num / den;
    BigInt r = num - q * den;
    if (r < 0) r += den;
    return Rat(r, den);
}

/// @brief Exact double conversion (used only for sampling coordinates/metrics).
inline double to_double(const Rat& x) { return static_cast<double>(x); }

/// @brief Render as "num/den" (or "num" when the denominator is 1).
inline std::string rat_to_string(const Rat& x) {
    const BigInt num = boost::multiprecision::numerator(x);
    const BigInt den = boost::multiprecision::denominator(x);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// @brief Parse "num", "num/den", or a decimal like "0.125" into an exact rational.
inline Rat rat_from_string(const std::string& s) {
    try {
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            const BigInt num(s.substr(0, slash));
            const BigInt den(s.substr(slash + 1));
            require(den != 0, "rational.zero-denominator", "dynamics", "rat_from_string",
                    "denominator nonzero", s);
            return Rat(num, den);
        }
        const auto dot = s.find('.');
        if (dot != std::string::npos) {
            const std::string ip = s.substr(0, dot);
            const std::string fp = s.substr(dot + 1);
            BigInt scale = 1;
            for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
            const bool neg = !ip.empty() && ip[0] == '-';
            const BigInt whole(ip.empty() || ip == "-" ? std::string("0") : ip);
            const BigInt frac(fp.empty() ? std::string("0") : fp);
            const BigInt num = whole * scale + (neg ? -frac : frac);
            return Rat(num, scale);
        }
        return Rat(BigInt(s), BigInt(1));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("rational.parse", "dynamics", "rat_from_string", "well-formed rational literal",
                    s + " (" + e.what() + ")");
    }
}

/// @brief Closed arc [lo, hi] on the circle with 0 <= lo <= hi < 1 (no wrap-around).
struct Arc {
    Rat lo;
    Rat hi;

    bool contains(const Rat& x) const { return lo <= x && x <= hi; }
    bool contains_arc(const Arc& other) const { return lo <= other.lo && other.hi <= hi; }
    Rat length() const { return hi - lo; }
};

/// @brief Arc-length distance between two circle points given as rationals in [0,1).
inline Rat circle_distance(const Rat& a, const Rat& b) {
    Rat d = mod1(a - b);
    if (d > Rat(1, 2)) d = 1 - d;
    return d;
}

} // namespace dsh
