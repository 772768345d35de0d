/* dsh/permutation.hpp — permutations of {1..n} and their row-moving unitaries.
 *
 * The convention throughout is that the unitary U[π] moves the i-th row of a
 * matrix to the π(i)-th row, i.e. (U[π])_{a,b} = 1 exactly when a = π(b).
 * Consequently U[π]·U[ρ] = U[π∘ρ] with (π∘ρ)(i) = π(ρ(i)).
 */
#pragma once

#include <vector>

#include "dsh/errors.hpp"

namespace dsh {

/// @brief A bijection of {1..n}, stored as 1-based images.
struct Permutation {
    int n = 0;
    std::vector<int> images; // images[i-1] = π(i), values in {1..n}

    static Permutation identity(int n) {
        Permutation p;
        p.n = n;
        p.images.resize(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) p.images[static_cast<std::size_t>(i) - 1] = i;
        return p;
    }

    /// @brief Transposition (i j) in S_n (allows i == j, giving the identity).
    static Permutation transposition(int n, int i, int j) {
        Permutation p = identity(n);
        p.images[static_cast<std::size_t>(i) - 1] = j;
        p.images[static_cast<std::size_t>(j) - 1] = i;
        return p;
    }

    /// @brief The cycle (j  j+1  ...  k): j -> j+1 -> ... -> k -> j.
    static Permutation cycle(int n, int j, int k) {
        require(1 <= j && j <= k && k <= n, "permutation.range", "upaths", "cycle",
                "1 <= j <= k <= n");
        Permutation p = identity(n);
        for (int t = j; t < k; ++t) p.images[static_cast<std::size_t>(t) - 1] = t + 1;
        p.images[static_cast<std::size_t>(k) - 1] = j;
        return p;
    }

    int operator()(int i) const { return images[static_cast<std::size_t>(i) - 1]; }

    /// @brief Composition: (this ∘ other)(i) = this(other(i)).
    Permutation compose(const Permutation& other) const {
        require(n == other.n, "permutation.size", "upaths", "compose", "equal degree");
        Permutation p = identity(n);
        for (int i = 1; i <= n; ++i)
            p.images[static_cast<std::size_t>(i) - 1] = (*this)(other(i));
        return p;
    }

    Permutation inverse() const {
        Permutation p = identity(n);
        for (int i = 1; i <= n; ++i) p.images[static_cast<std::size_t>((*this)(i)) - 1] = i;
        return p;
    }

    /// @brief Non-negative power by repeated composition.
    Permutation power(int e) const {
        Permutation acc = identity(n);
        for (int t = 0; t < e; ++t) acc = compose(acc);
        return acc;
    }

    bool is_valid() const {
        if (static_cast<int>(images.size()) != n) return false;
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        for (int v : images) {
            if (v < 1 || v > n || seen[static_cast<std::size_t>(v) - 1]) return false;
            seen[static_cast<std::size_t>(v) - 1] = true;
        }
        return true;
    }

    bool operator==(const Permutation& other) const {
        return n == other.n && images == other.images;
    }
};

} // namespace dsh
