// Matrix probes: norms, bandwidth, crosses, block points, SVD helpers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsh/matrix.hpp"
#include "dsh/permutation.hpp"

#include <cmath>
#include <initializer_list>

using dsh::Cplx;
using dsh::Mat;

namespace {

Mat from_rows(int n, std::initializer_list<double> entries) {
    Mat m(n, n);
    auto it = entries.begin();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Cplx(*it++, 0.0);
    return m;
}

} // namespace

TEST_CASE("operator norm and singular floor of diagonal matrices") {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = -4.0;
    CHECK(dsh::op_norm(m) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(dsh::singular_floor(m) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("singular values of the unipotent Jordan block are the golden ratio pair") {
    // [[1,1],[0,1]] has m m^adj with eigenvalues (3 +- sqrt 5)/2, so the
    // singular values are phi and 1/phi.
    const Mat m = from_rows(2, {1, 1, 0, 1});
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(dsh::op_norm(m) == doctest::Approx(phi).epsilon(1e-13));
    CHECK(dsh::singular_floor(m) == doctest::Approx(1.0 / phi).epsilon(1e-13));
}

TEST_CASE("bandwidth distinguishes zero, diagonal, banded, and full matrices") {
    CHECK(dsh::bandwidth(Mat::Zero(5, 5)) == 0);
    CHECK(dsh::bandwidth(Mat::Identity(5, 5)) == 1);

    Mat sub = Mat::Zero(4, 4);
    for (int i = 1; i < 4; ++i) sub(i, i - 1) = 1.0;
    CHECK(dsh::bandwidth(sub) == 2);

    Mat full = Mat::Ones(4, 4);
    CHECK(dsh::bandwidth(full) == 4);

    // entries at modulus tau_zero do not count as occupied
    Mat dusty = Mat::Identity(3, 3);
    dusty(2, 0) = Cplx(0.0, 0.5e-12);
    CHECK(dsh::bandwidth(dusty) == 1);
}

TEST_CASE("zero crosses are whole vanishing rows and columns") {
    Mat m = Mat::Ones(4, 4);
    m.row(1).setZero();
    m.col(1).setZero();
    CHECK(dsh::has_zero_cross(m, 2));
    CHECK_FALSE(dsh::has_zero_cross(m, 1));
    CHECK_FALSE(dsh::has_zero_cross(m, 3));
}

TEST_CASE("block points split a direct sum exactly before the second block") {
    Mat a = Mat::Ones(2, 2);
    Mat b = Mat::Ones(3, 3) * Cplx(0.0, 1.0);
    const Mat m = dsh::direct_sum({a, b});
    REQUIRE(m.rows() == 5);
    CHECK(m(0, 1) == Cplx(1.0, 0.0));
    CHECK(m(2, 2) == Cplx(0.0, 1.0));
    CHECK(m(0, 2) == Cplx(0.0, 0.0));
    CHECK(dsh::has_block_point(m, 1));   // trivial split
    CHECK(dsh::has_block_point(m, 3));   // the real seam
    CHECK_FALSE(dsh::has_block_point(m, 2));
    CHECK_FALSE(dsh::has_block_point(m, 4));
}

TEST_CASE("SVD reconstructs the matrix with descending singular values") {
    Mat m(3, 3);
    m << Cplx(1, 2), Cplx(0, -1), Cplx(3, 0),
         Cplx(-2, 0.5), Cplx(4, 4), Cplx(0, 0),
         Cplx(0.1, 0), Cplx(1, -3), Cplx(2, 2);
    const auto s = dsh::svd_decompose(m);
    const Mat rebuilt = s.u * s.sigma.asDiagonal() * s.v.adjoint();
    CHECK(dsh::max_abs(rebuilt - m) <= 1e-12);
    CHECK(s.sigma(0) >= s.sigma(1));
    CHECK(s.sigma(1) >= s.sigma(2));
    CHECK(dsh::unitary_defect(s.u) <= 1e-13);
    CHECK(dsh::unitary_defect(s.v) <= 1e-13);
}

TEST_CASE("zero-cross factorization parks the defect in a cross at index 1") {
    Mat m(3, 3);
    m << Cplx(2, 0), Cplx(0, 1), Cplx(0.5, 0),
         Cplx(0, -1), Cplx(1, 1), Cplx(0, 0.25),
         Cplx(0.5, 0.5), Cplx(0, 0), Cplx(3, -1);
    const auto f = dsh::zero_cross_factorize(m);
    CHECK(f.cost == doctest::Approx(dsh::singular_floor(m)).epsilon(1e-12));
    CHECK(dsh::unitary_defect(f.w) <= 1e-13);
    CHECK(dsh::unitary_defect(f.v) <= 1e-13);
    CHECK(dsh::op_norm(m - f.m_trunc) <= f.cost + 1e-12);
    CHECK(dsh::has_zero_cross(f.w * f.m_trunc * f.v, 1));
}

TEST_CASE("zero-cross factorization of an exactly singular matrix is free") {
    Mat m = Mat::Zero(3, 3);
    m(1, 1) = 2.0;
    m(2, 1) = Cplx(0, 1);
    m(1, 2) = -1.0;
    const auto f = dsh::zero_cross_factorize(m);
    CHECK(f.cost <= 1e-14);
    CHECK(dsh::has_zero_cross(f.w * f.m_trunc * f.v, 1));
}

TEST_CASE("permutation unitaries follow the row convention and compose") {
    // cycle(3, 1, 3): 1 -> 2 -> 3 -> 1; U e_b = e_{p(b)}
    const auto p = dsh::Permutation::cycle(3, 1, 3);
    const Mat u = dsh::perm_unitary(p);
    CHECK(u(1, 0) == Cplx(1.0, 0.0));
    CHECK(u(2, 1) == Cplx(1.0, 0.0));
    CHECK(u(0, 2) == Cplx(1.0, 0.0));
    CHECK(dsh::unitary_defect(u) == 0.0);

    const auto q = dsh::Permutation::transposition(3, 1, 2);
    const Mat lhs = dsh::perm_unitary(p) * dsh::perm_unitary(q);
    const Mat rhs = dsh::perm_unitary(p.compose(q));
    CHECK(dsh::max_abs(lhs - rhs) == 0.0);
}

TEST_CASE("chop zeroes small entries exactly and leaves the rest untouched") {
    Mat m(2, 2);
    m << Cplx(1, 0), Cplx(1e-13, 1e-13),
         Cplx(0, 2e-12), Cplx(0.5, -0.5);
    const Mat c = dsh::chop(m, 1e-12);
    CHECK(c(0, 1) == Cplx(0.0, 0.0));
    CHECK(c(1, 0) == Cplx(0.0, 2e-12)); // above tau, kept bit-for-bit
    CHECK(c(0, 0) == m(0, 0));
    CHECK(c(1, 1) == m(1, 1));
}

TEST_CASE("unitary defect separates unitaries from scalings") {
    CHECK(dsh::unitary_defect(Mat::Identity(4, 4)) == 0.0);
    CHECK(dsh::unitary_defect(2.0 * Mat::Identity(4, 4)) == doctest::Approx(3.0));
}

TEST_CASE("probes reject non-square or out-of-range input") {
    CHECK_THROWS_AS(dsh::has_zero_cross(Mat::Zero(3, 3), 0), dsh::Error);
    CHECK_THROWS_AS(dsh::has_zero_cross(Mat::Zero(3, 3), 4), dsh::Error);
    CHECK_THROWS_AS(dsh::has_block_point(Mat::Zero(2, 3), 1), dsh::Error);
}
