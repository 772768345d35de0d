// Unitary paths: endpoint values, exactness at parameter zero, unitarity,
// and agreement with the permutations they are documented to reach.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsh/matrix.hpp"
#include "dsh/paths.hpp"
#include "dsh/permutation.hpp"

#include <algorithm>
#include <cmath>

using dsh::Mat;

TEST_CASE("elementary path is exactly the identity at parameter zero") {
    const Mat u = dsh::path_u(2, 5, 0.0, 6);
    CHECK(dsh::max_abs(u - Mat::Identity(6, 6)) == 0.0);
}

TEST_CASE("elementary path reaches the swap at parameter one") {
    const Mat u = dsh::path_u(2, 5, 1.0, 6);
    const Mat swap = dsh::perm_unitary(dsh::Permutation::transposition(6, 2, 5));
    CHECK(dsh::max_abs(u - swap) <= 1e-15);
}

TEST_CASE("elementary path stays unitary and only touches its block") {
    for (double xi : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const Mat u = dsh::path_u(1, 3, xi, 4);
        CHECK(dsh::unitary_defect(u) <= 1e-14);
        // rows/columns outside {1,3} are untouched identity
        CHECK(u(1, 1) == dsh::Cplx(1.0, 0.0));
        CHECK(u(3, 3) == dsh::Cplx(1.0, 0.0));
        CHECK(u(0, 1) == dsh::Cplx(0.0, 0.0));
        CHECK(u(1, 2) == dsh::Cplx(0.0, 0.0));
    }
}

TEST_CASE("staggered ramp hits its breakpoints exactly") {
    CHECK(dsh::ramp_delta(2, 4, 0.25) == 0.0);
    CHECK(dsh::ramp_delta(2, 4, 0.5) == 1.0);
    CHECK(dsh::ramp_delta(2, 4, 0.375) == doctest::Approx(0.5));
    CHECK(dsh::ramp_delta(1, 4, 0.0) == 0.0);
    CHECK(dsh::ramp_delta(4, 4, 1.0) == 1.0);
    CHECK(dsh::ramp_delta(3, 4, 0.1) == 0.0);  // before its window
    CHECK(dsh::ramp_delta(1, 4, 0.9) == 1.0);  // after its window
}

TEST_CASE("cycle path runs from the identity to the cycle permutation") {
    CHECK(dsh::max_abs(dsh::path_w(3, 3, 0.7, 5) - Mat::Identity(5, 5)) == 0.0);
    CHECK(dsh::max_abs(dsh::path_w(2, 4, 0.0, 5) - Mat::Identity(5, 5)) == 0.0);
    const Mat end = dsh::path_w(2, 4, 1.0, 5);
    const Mat cyc = dsh::perm_unitary(dsh::Permutation::cycle(5, 2, 4));
    CHECK(dsh::max_abs(end - cyc) <= 1e-14);
    for (double xi : {0.2, 0.5, 0.8})
        CHECK(dsh::unitary_defect(dsh::path_w(2, 4, xi, 5)) <= 1e-13);
}

TEST_CASE("cross mover starts at the identity and ends on its permutation") {
    const std::vector<int> z{2, 4, 7};
    CHECK(dsh::max_abs(dsh::cross_mover(z, 0.0, 8) - Mat::Identity(8, 8)) == 0.0);

    const auto sigma = dsh::cross_mover_permutation(z, 8);
    // z_k lands on m - k + 1: 2 -> 3, 4 -> 2, 7 -> 1
    CHECK(sigma(2) == 3);
    CHECK(sigma(4) == 2);
    CHECK(sigma(7) == 1);
    CHECK(dsh::max_abs(dsh::cross_mover(z, 1.0, 8) - dsh::perm_unitary(sigma)) <= 1e-13);
    for (double xi : {0.3, 0.6, 0.9})
        CHECK(dsh::unitary_defect(dsh::cross_mover(z, xi, 8)) <= 1e-13);
}

TEST_CASE("moving crosses by conjugation relocates them to the front") {
    const int n = 8;
    const std::vector<int> z{3, 6};
    Mat d = Mat::Ones(n, n);
    for (int k : z) {
        d.row(k - 1).setZero();
        d.col(k - 1).setZero();
    }
    const Mat w = dsh::cross_mover(z, 1.0, n);
    const Mat moved = w * d * w.adjoint();
    CHECK(dsh::has_zero_cross(moved, 1));
    CHECK(dsh::has_zero_cross(moved, 2));
}

TEST_CASE("block transposition stacks elementary swaps over a window") {
    const dsh::PathParams params{10, 3};
    CHECK(dsh::max_abs(dsh::block_transposition(5, 9, 0.0, params) -
                       Mat::Identity(10, 10)) == 0.0);

    const auto sigma = dsh::block_transposition_permutation(5, 9, params);
    // windows (5-3, 5] and (9-3, 9] swap slot by slot
    CHECK(sigma(3) == 7);
    CHECK(sigma(4) == 8);
    CHECK(sigma(5) == 9);
    CHECK(sigma(7) == 3);
    CHECK(sigma(1) == 1);
    CHECK(sigma(10) == 10);
    const Mat end = dsh::block_transposition(5, 9, 1.0, params);
    CHECK(dsh::max_abs(end - dsh::perm_unitary(sigma)) <= 1e-14);
    CHECK(dsh::unitary_defect(dsh::block_transposition(5, 9, 0.37, params)) <= 1e-13);
}

TEST_CASE("shift family degenerates to the identity at the window size") {
    const dsh::PathParams params{3, 3};
    const std::vector<double> xi(3, 0.5);
    CHECK(dsh::max_abs(dsh::lt_family(xi, params) - Mat::Identity(3, 3)) == 0.0);
}

TEST_CASE("shift family with all parameters zero is the pure cyclic shift") {
    const dsh::PathParams params{7, 2};
    const std::vector<double> xi(7, 0.0);
    const Mat w = dsh::lt_family(xi, params);
    const auto gamma = dsh::Permutation::cycle(7, 1, 7);
    const Mat expect = dsh::perm_unitary(gamma.power(2));
    CHECK(dsh::max_abs(w - expect) == 0.0);  // zero factors are skipped exactly
}

TEST_CASE("shift family is unitary for generic parameters") {
    const dsh::PathParams params{9, 2};
    std::vector<double> xi(9, 0.0);
    xi[2] = 0.4;
    xi[4] = 1.0;
    xi[6] = 0.8;
    CHECK(dsh::unitary_defect(dsh::lt_family(xi, params)) <= 1e-13);
}

namespace {

double upper_abs(const Mat& t) {
    double upper = 0.0;
    for (int i = 0; i < t.rows(); ++i)
        for (int j = i; j < t.cols(); ++j) upper = std::max(upper, std::abs(t(i, j)));
    return upper;
}

Mat banded_with_crosses(int n, int band, const std::vector<int>& crosses) {
    Mat d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d(i, j) = (std::abs(i - j) <= band) ? dsh::Cplx(1.0 + i, 0.5 * j)
                                                : dsh::Cplx(0.0, 0.0);
    for (int k : crosses) {
        d.row(k - 1).setZero();
        d.col(k - 1).setZero();
    }
    return d;
}

} // namespace

TEST_CASE("one aligned cross window turns a banded matrix strictly lower") {
    // d has bandwidth <= N and zero crosses at 1..N; with every interior
    // parameter zero the family is the N-fold shift, and d times it is
    // strictly lower triangular.
    const int n = 6, N = 2;
    const Mat d = banded_with_crosses(n, N - 1, {1, 2});
    const Mat w = dsh::lt_family(std::vector<double>(n, 0.0), dsh::PathParams{n, N});
    CHECK(upper_abs(d * w) == 0.0);
}

TEST_CASE("two aligned cross windows still triangularize under the family") {
    // crosses at 1..N and at k..k+N-1 for an interior window start k; the
    // family parameter is one exactly at the interior window start, matching
    // how the marker diagonal steers the triangularization stage.
    const int n = 8, N = 2;
    const Mat d = banded_with_crosses(n, N - 1, {1, 2, 5, 6});
    std::vector<double> xi(n, 0.0);
    xi[4] = 1.0; // window start 5, positions are one-based
    const Mat w = dsh::lt_family(xi, dsh::PathParams{n, N});
    CHECK(upper_abs(d * w) <= 1e-13);
}

TEST_CASE("paths reject out-of-range indices") {
    CHECK_THROWS_AS(dsh::path_u(3, 3, 0.5, 4), dsh::Error);
    CHECK_THROWS_AS(dsh::path_u(0, 2, 0.5, 4), dsh::Error);
    CHECK_THROWS_AS(dsh::path_w(4, 2, 0.5, 5), dsh::Error);
    CHECK_THROWS_AS(dsh::block_transposition(1, 9, 0.5, dsh::PathParams{10, 3}),
                    dsh::Error);
}
