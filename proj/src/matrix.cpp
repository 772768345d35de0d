/* matrix.cpp — spectral probes and SVD-based factorizations. */

#include "dsh/matrix.hpp"

#include <Eigen/SVD>

#include "dsh/permutation.hpp"

namespace dsh {

namespace {

// Jacobi is the more accurate choice for small blocks; BDC scales better for
// the larger tower matrices (n up to a few hundred).
constexpr int BDC_THRESHOLD = 32;

Svd jacobi_svd(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// Eigen 3.4.0's BDCSVD can return an inconsistent factorization (wrong
// singular values included) on complex matrices whose spectrum is heavily
// clustered at zero, so every BDC result is checked by reconstruction and
// recomputed with the unconditionally stable Jacobi SVD when it fails.
Svd verified_svd(const Mat& m) {
    if (std::max(m.rows(), m.cols()) >= BDC_THRESHOLD) {
        Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
        const Mat recon = out.u * out.sigma.asDiagonal() * out.v.adjoint();
        const double scale = std::max(1.0, max_abs(m));
        if (max_abs(recon - m) <= 1e-11 * scale) return out;
    }
    return jacobi_svd(m);
}

Eigen::VectorXd singular_values(const Mat& m) {
    if (m.rows() == 0 || m.cols() == 0) return Eigen::VectorXd();
    if (std::max(m.rows(), m.cols()) >= BDC_THRESHOLD) return verified_svd(m).sigma;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues();
}

} // namespace

double op_norm(const Mat& m) {
    const Eigen::VectorXd s = singular_values(m);
    return s.size() == 0 ? 0.0 : s(0);
}

double singular_floor(const Mat& m) {
    require(m.rows() == m.cols(), "matrix.not-square", "matcore", "singular_floor", "m square");
    const Eigen::VectorXd s = singular_values(m);
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

int bandwidth(const Mat& m, const Tolerances& tol) {
    require(m.rows() == m.cols(), "matrix.not-square", "matcore", "bandwidth", "m square");
    const int n = static_cast<int>(m.rows());
    int r = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(m(i, j)) > tol.tau_zero) r = std::max(r, std::abs(i - j) + 1);
    return r;
}

bool has_zero_cross(const Mat& m, int k, const Tolerances& tol) {
    require(m.rows() == m.cols(), "matrix.not-square", "matcore", "has_zero_cross", "m square");
    const int n = static_cast<int>(m.rows());
    require(1 <= k && k <= n, "matrix.index-range", "matcore", "has_zero_cross", "1 <= k <= n");
    const int kk = k - 1;
    for (int t = 0; t < n; ++t)
        if (std::abs(m(kk, t)) > tol.tau_zero || std::abs(m(t, kk)) > tol.tau_zero) return false;
    return true;
}

bool has_block_point(const Mat& m, int k, const Tolerances& tol) {
    require(m.rows() == m.cols(), "matrix.not-square", "matcore", "has_block_point", "m square");
    const int n = static_cast<int>(m.rows());
    require(1 <= k && k <= n, "matrix.index-range", "matcore", "has_block_point", "1 <= k <= n");
    const int kk = k - 1; // split before this 0-based index
    for (int i = kk; i < n; ++i)
        for (int j = 0; j < kk; ++j)
            if (std::abs(m(i, j)) > tol.tau_zero) return false;
    for (int i = 0; i < kk; ++i)
        for (int j = kk; j < n; ++j)
            if (std::abs(m(i, j)) > tol.tau_zero) return false;
    return true;
}

Svd svd_decompose(const Mat& m) { return verified_svd(m); }

ZeroCrossFactorization zero_cross_factorize(const Mat& m, const Tolerances& tol) {
    require(m.rows() == m.cols(), "matrix.not-square", "matcore", "zero_cross_factorize",
            "m square");
    const int n = static_cast<int>(m.rows());
    ZeroCrossFactorization out;
    if (n == 0) {
        out.w = out.v = out.m_trunc = Mat::Zero(0, 0);
        return out;
    }

    const Svd svd = svd_decompose(m);
    Eigen::VectorXd sigma = svd.sigma; // descending, so the defect sits at index n-1
    out.cost = sigma(n - 1);
    sigma(n - 1) = 0.0;
    out.m_trunc = svd.u * sigma.asDiagonal() * svd.v.adjoint();

    // Swap the zeroed singular direction to position 1 so that
    // w * m_trunc * v = R * diag(sigma) * R with the zero at (1,1).
    const Mat r = perm_unitary(Permutation::transposition(n, 1, n));
    out.w = r * svd.u.adjoint();
    out.v = svd.v * r; // r is symmetric (a transposition), so r == r^T

    (void)tol;
    return out;
}

Mat perm_unitary(const Permutation& p) {
    require(p.is_valid(), "permutation.invalid", "upaths", "perm_unitary", "images is a bijection");
    Mat u = Mat::Zero(p.n, p.n);
    for (int b = 1; b <= p.n; ++b) u(p(b) - 1, b - 1) = 1.0;
    return u;
}

Mat direct_sum(const std::vector<Mat>& blocks) {
    Eigen::Index total = 0;
    for (const Mat& b : blocks) {
        require(b.rows() == b.cols(), "matrix.not-square", "matcore", "direct_sum",
                "square blocks");
        total += b.rows();
    }
    Mat out = Mat::Zero(total, total);
    Eigen::Index at = 0;
    for (const Mat& b : blocks) {
        out.block(at, at, b.rows(), b.rows()) = b;
        at += b.rows();
    }
    return out;
}

Mat chop(const Mat& m, double tau) {
    Mat out = m;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            if (std::abs(out(i, j)) <= tau) out(i, j) = Cplx(0.0, 0.0);
    return out;
}

double max_abs(const Mat& m) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(m(i, j)));
    return best;
}

double unitary_defect(const Mat& m) {
    if (m.rows() != m.cols()) return 1.0;
    const Mat d = m * m.adjoint() - Mat::Identity(m.rows(), m.cols());
    return max_abs(d);
}

} // namespace dsh
