/* paths.cpp — unitary path constructions. */
#include "dsh/paths.hpp"

#include "dsh/errors.hpp"

#include <cmath>

namespace dsh {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_xi(double xi, const char* op) {
    require(xi >= 0.0 && xi <= 1.0, "paths.parameter-range", "upaths", op,
            "path parameter must lie in [0, 1]",
            "got xi = " + std::to_string(xi));
}

} // namespace

Mat path_u(int i, int j, double xi, int n) {
    require(n >= 2, "paths.size", "upaths", "path_u",
            "ambient size must be at least 2", "got n = " + std::to_string(n));
    require(1 <= i && i < j && j <= n, "paths.index-range", "upaths", "path_u",
            "indices must satisfy 1 <= i < j <= n",
            "got i = " + std::to_string(i) + ", j = " + std::to_string(j) +
                ", n = " + std::to_string(n));
    check_xi(xi, "path_u");
    const double c = std::cos(kPi * xi / 2.0);
    const double s = std::sin(kPi * xi / 2.0);
    const Cplx phase = std::exp(Cplx(0.0, -kPi * xi / 2.0));
    Mat u = Mat::Identity(n, n);
    u(i - 1, i - 1) = phase * c;
    u(j - 1, j - 1) = phase * c;
    u(i - 1, j - 1) = phase * Cplx(0.0, s);
    u(j - 1, i - 1) = phase * Cplx(0.0, s);
    return u;
}

double ramp_delta(int i, int j, double xi) {
    require(1 <= i && i <= j, "paths.index-range", "upaths", "ramp_delta",
            "ramp indices must satisfy 1 <= i <= j",
            "got i = " + std::to_string(i) + ", j = " + std::to_string(j));
    check_xi(xi, "ramp_delta");
    const double lo = static_cast<double>(i - 1) / static_cast<double>(j);
    const double hi = static_cast<double>(i) / static_cast<double>(j);
    if (xi <= lo) return 0.0;
    if (xi >= hi) return 1.0;
    return (xi - lo) * static_cast<double>(j);
}

Mat path_w(int i, int j, double xi, int n) {
    require(1 <= i && i <= j && j <= n, "paths.index-range", "upaths", "path_w",
            "indices must satisfy 1 <= i <= j <= n",
            "got i = " + std::to_string(i) + ", j = " + std::to_string(j) +
                ", n = " + std::to_string(n));
    check_xi(xi, "path_w");
    Mat w = Mat::Identity(n, n);
    if (i == j) return w;
    // Ordered left-to-right: u_(i i+1)(delta^{j-i}) ... u_(j-1 j)(delta^{1}),
    // each factor ramping on its own subinterval so at xi=1 the product is
    // the cycle permutation unitary U[(i i+1 ... j)].
    const int len = j - i;
    for (int t = 0; t < len; ++t) {
        w = w * path_u(i + t, i + t + 1, ramp_delta(len - t, len, xi), n);
    }
    return w;
}

Mat cross_mover(const std::vector<int>& z_list, double xi, int n) {
    const int m = static_cast<int>(z_list.size());
    require(m >= 1, "paths.empty-targets", "upaths", "cross_mover",
            "at least one target index is required", "got an empty list");
    check_xi(xi, "cross_mover");
    for (int k = 0; k < m; ++k) {
        require(1 <= z_list[k] && z_list[k] <= n, "paths.index-range", "upaths",
                "cross_mover", "target indices must lie in 1..n",
                "got z = " + std::to_string(z_list[k]) + " with n = " +
                    std::to_string(n));
        require(k == 0 || z_list[k - 1] < z_list[k], "paths.unsorted-targets",
                "upaths", "cross_mover",
                "target indices must be strictly increasing",
                "offending position " + std::to_string(k + 1));
    }
    // Leftmost factor handles the largest target; each factor gets its own
    // ramp slot so the motions happen one after another as xi runs 0 -> 1.
    Mat w = Mat::Identity(n, n);
    for (int k = m; k >= 1; --k) {
        w = w * path_w(1, z_list[k - 1], ramp_delta(m - k + 1, m, xi), n);
    }
    return w;
}

Permutation cross_mover_permutation(const std::vector<int>& z_list, int n) {
    const int m = static_cast<int>(z_list.size());
    Permutation sigma = Permutation::identity(n);
    for (int k = m; k >= 1; --k) {
        sigma = sigma.compose(Permutation::cycle(n, 1, z_list[k - 1]));
    }
    return sigma;
}

Mat block_transposition(int j, int k, double xi, const PathParams& params) {
    const int n = params.n;
    const int N = params.N;
    require(N >= 1 && N <= j && j <= k && k <= n, "paths.index-range", "upaths",
            "block_transposition",
            "indices must satisfy 1 <= N <= j <= k <= n",
            "got N = " + std::to_string(N) + ", j = " + std::to_string(j) +
                ", k = " + std::to_string(k) + ", n = " + std::to_string(n));
    check_xi(xi, "block_transposition");
    Mat u = Mat::Identity(n, n);
    if (j == k) return u;
    for (int t = 1; t <= N; ++t) {
        u = u * path_u(j - N + t, k - N + t, xi, n);
    }
    return u;
}

Permutation block_transposition_permutation(int j, int k, const PathParams& params) {
    const int n = params.n;
    const int N = params.N;
    Permutation sigma = Permutation::identity(n);
    if (j == k) return sigma;
    for (int t = 1; t <= N; ++t) {
        sigma = sigma.compose(Permutation::transposition(n, j - N + t, k - N + t));
    }
    return sigma;
}

Mat lt_family(const std::vector<double>& xi_vec, const PathParams& params) {
    const int n = params.n;
    const int N = params.N;
    require(N >= 1 && N <= n, "paths.index-range", "upaths", "lt_family",
            "window must satisfy 1 <= N <= n",
            "got N = " + std::to_string(N) + ", n = " + std::to_string(n));
    require(static_cast<int>(xi_vec.size()) == n, "paths.parameter-count",
            "upaths", "lt_family",
            "one path parameter per ambient index is required",
            "got " + std::to_string(xi_vec.size()) + " parameters for n = " +
                std::to_string(n));
    for (double xi : xi_vec) check_xi(xi, "lt_family");
    if (n == N) return Mat::Identity(N, N);
    Mat w = perm_unitary(Permutation::cycle(n, 1, n).power(N));
    for (int k = N; k <= n - 1; ++k) {
        // At parameter 0 the factor is exactly the identity; skipping it keeps
        // the product identical and the cost proportional to the active set.
        if (xi_vec[static_cast<size_t>(k)] == 0.0) continue;
        w = w * block_transposition(k, n, xi_vec[static_cast<size_t>(k)], params);
    }
    return w;
}

} // namespace dsh
