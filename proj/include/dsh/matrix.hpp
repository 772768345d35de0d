/* dsh/matrix.hpp — dense complex matrices, spectral probes, and SVD helpers.
 *
 * All stages of the toolkit reason about square complex matrices through a
 * small set of probes:
 *
 *   op_norm        largest singular value (the C*-norm of a matrix value)
 *   singular_floor smallest singular value (invertibility margin)
 *   bandwidth      least r >= 0 such that entries with |i-j| >= r vanish,
 *                  with fallback n when the corner entries are occupied
 *   zero cross     row k and column k vanish entirely
 *   block point    the matrix splits as a direct sum across index k
 *
 * Entries are double-precision complex; "vanish" always means modulus at
 * most tau_zero. Indices in every public signature are 1-based.
 */
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dsh/errors.hpp"
#include "dsh/tolerances.hpp"

namespace dsh {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

struct Permutation;

/// @brief Largest singular value of m (its operator norm).
double op_norm(const Mat& m);

/// @brief Smallest singular value; m counts as invertible iff this exceeds tau_sing.
double singular_floor(const Mat& m);

/// @brief Least r >= 0 with |m(i,j)| <= tau_zero whenever |i-j| >= r; n if none < n works.
int bandwidth(const Mat& m, const Tolerances& tol = {});

/// @brief True iff every entry of row k and column k has modulus <= tau_zero (k 1-based).
bool has_zero_cross(const Mat& m, int k, const Tolerances& tol = {});

/// @brief True iff both off-diagonal rectangles split by index k vanish (k 1-based).
bool has_block_point(const Mat& m, int k, const Tolerances& tol = {});

/// @brief Singular value decomposition m = u * diag(sigma) * v.adjoint(), sigma descending.
struct Svd {
    Mat u;
    Eigen::VectorXd sigma;
    Mat v;
};
Svd svd_decompose(const Mat& m);

/// @brief Factor a (near-)singular matrix so the defect sits in a zero cross at index 1.
///
/// Returns unitaries w, v and m_trunc with the smallest singular value of m
/// zeroed, such that w * m_trunc * v has a zero cross at index 1 and
/// ||m - m_trunc|| equals singular_floor(m). The truncation cost is returned
/// regardless of whether m was singular to begin with.
struct ZeroCrossFactorization {
    Mat w;
    Mat v;
    Mat m_trunc;
    double cost = 0.0; // == singular_floor(m)
};
ZeroCrossFactorization zero_cross_factorize(const Mat& m, const Tolerances& tol = {});

/// @brief 0/1 unitary realizing p on rows: (perm_unitary(p))_{a,b} = [a == p(b)].
Mat perm_unitary(const Permutation& p);

/// @brief diag(blocks[0], blocks[1], ...) as one square matrix.
Mat direct_sum(const std::vector<Mat>& blocks);

/// @brief Copy of m with every entry of modulus <= tau set to exact zero.
Mat chop(const Mat& m, double tau);

/// @brief Largest entry modulus (0 for empty matrices).
double max_abs(const Mat& m);

/// @brief ||m * m.adjoint() - 1|| in max-entry norm; small iff m is unitary.
double unitary_defect(const Mat& m);

} // namespace dsh
