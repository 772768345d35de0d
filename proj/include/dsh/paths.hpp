/* dsh/paths.hpp — continuous unitary paths used to steer zero crosses.
 *
 * The elementary path connects the identity to a transposition unitary
 * while touching only the four entries of a 2x2 block:
 *
 *   u_(i j)(xi) = exp(-i*pi*xi/2) * ( cos(pi*xi/2)*1 + i*sin(pi*xi/2)*swap )
 *
 * restricted to rows/columns {i, j}. It satisfies u(0) = 1, u(1) = U[(i j)]
 * (the real 0/1 swap matrix), and stays unitary for all xi in [0, 1].
 *
 * From it are built:
 *   path_w             the cycle path w_j^i with staggered linear ramps,
 *                      reaching U[(i i+1 ... j)] at parameter 1
 *   cross_mover        a product of cycle paths that hauls zero crosses at
 *                      prescribed indices z_1 < ... < z_m down to 1..m
 *   block_transposition u^n_{j,k}: N stacked transposition paths moving a
 *                      width-N window
 *   lt_family          W_n: the N-fold cyclic shift composed with a chain of
 *                      block transpositions; the conjugator that turns
 *                      banded matrices with aligned crosses into strictly
 *                      lower triangular ones
 */
#pragma once

#include "dsh/matrix.hpp"
#include "dsh/permutation.hpp"

namespace dsh {

/// @brief Width-N block transposition parameters (n = ambient size, N = window).
struct PathParams {
    int n = 0;
    int N = 1;
};

/// @brief Elementary two-index path: identity at xi=0, U[(i j)] at xi=1 (1 <= i < j <= n).
Mat path_u(int i, int j, double xi, int n);

/// @brief Staggered ramp: 0 on [0,(i-1)/j], linear on [(i-1)/j, i/j], 1 on [i/j, 1].
double ramp_delta(int i, int j, double xi);

/// @brief Cycle path w_j^i(xi); w_i^i == 1_n, and w_j^i(1) = U[(i i+1 ... j)].
Mat path_w(int i, int j, double xi, int n);

/// @brief Product of cycle paths collecting crosses at z_1 < ... < z_m toward the front.
///
/// At xi=0 it is the identity; at xi=1 it equals U[sigma] where
/// sigma(z_k) = m-k+1. Conjugating a matrix with zero crosses at the z's by
/// the value at xi=1 leaves it with zero crosses at 1..m.
Mat cross_mover(const std::vector<int>& z_list, double xi, int n);

/// @brief The permutation reached by cross_mover at xi=1.
Permutation cross_mover_permutation(const std::vector<int>& z_list, int n);

/// @brief Block transposition path u^n_{j,k}(xi): N factors u_((j-N+t)(k-N+t)) (N <= j <= k <= n).
Mat block_transposition(int j, int k, double xi, const PathParams& params);

/// @brief The permutation sigma^n_{j,k} reached by block_transposition at xi=1.
Permutation block_transposition_permutation(int j, int k, const PathParams& params);

/// @brief W_n(xi_1..xi_n) = U[gamma_{1,n}]^N * prod_{k=N}^{n-1} u^n_{k,n}(xi_{k+1}); 1_N when n==N.
Mat lt_family(const std::vector<double>& xi_vec, const PathParams& params);

} // namespace dsh
