/* dsh/rng.hpp — deterministic random generation for seeded test suites.
 *
 * The report contract requires byte-identical output for identical seeds on
 * every platform. std::mt19937 itself is portable but the standard
 * <random> distributions are implementation-defined, so draws here use a
 * fixed splitmix64 core with explicitly coded transforms (uniform reals,
 * bounded integers, Box-Muller normals).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace dsh {

/// @brief splitmix64 engine: tiny, fast, and fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// @brief Next raw 64-bit word.
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// @brief Uniform double in [0, 1) with 53 significant bits.
    double unit_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// @brief Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_real(); }

    /// @brief Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free multiply-shift; bias is < 2^-64 and irrelevant here,
        // but determinism requires a fixed recipe.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// @brief Uniform integer in [lo, hi] inclusive.
    long long between(long long lo, long long hi) {
        return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// @brief Standard normal via Box-Muller (one value per call, fixed order).
    double normal() {
        double u1 = unit_real();
        double u2 = unit_real();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// @brief Complex standard normal (independent re/im, each variance 1).
    std::complex<double> cnormal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    /// @brief k distinct values from {0,...,n-1}, ascending.
    std::vector<int> distinct_sorted(int n, int k) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        // Partial Fisher-Yates with fixed draw order.
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> out(pool.begin(), pool.begin() + k);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::uint64_t state_;
};

} // namespace dsh
