// Indicator elements: exact 0/1 diagonals marking decomposition block starts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsh/indicators.hpp"

#include <algorithm>

using dsh::Cplx;
using dsh::Mat;

namespace {

/// Level 1: free a, b (size 3).  Level 2 (size 9): free c, glued
/// y1 = diag(a, b, a-again? no - distinct) -> use a, b, and level-1 c2.
/// Keep it simple: three level-1 points a, b, d; y1 = diag(a, b, d).
dsh::PresentationPtr marker_playground() {
    dsh::Level l1;
    l1.n = 3;
    l1.points = {{"a", {0.0}}, {"b", {0.2}}, {"d", {0.4}}};
    dsh::Level l2;
    l2.n = 9;
    l2.points = {{"c", {0.6}}, {"y1", {0.8}}};
    l2.y_ids = {"y1"};
    l2.decomp["y1"] = {{1, "a"}, {1, "b"}, {1, "d"}};
    return std::make_shared<dsh::Presentation>(std::vector<dsh::Level>{l1, l2});
}

std::vector<int> marked_positions(const Mat& m, int n) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
        if (m(j, j) == Cplx(1.0, 0.0)) out.push_back(j + 1);
    return out;
}

bool is_diag_01(const Mat& m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            if (i != j && m(i, j) != Cplx(0.0, 0.0)) return false;
            if (i == j && m(i, j) != Cplx(0.0, 0.0) && m(i, j) != Cplx(1.0, 0.0))
                return false;
        }
    return true;
}

} // namespace

TEST_CASE("the marker spec validates against the smallest matrix size") {
    const auto p = marker_playground();
    dsh::IndicatorSpec ok{1, {0, 1}, {}};
    CHECK(dsh::validate_indicator_spec(*p, ok).empty());

    dsh::IndicatorSpec negative{1, {-1, 0}, {}};
    CHECK_FALSE(dsh::validate_indicator_spec(*p, negative).empty());

    dsh::IndicatorSpec unsorted{1, {1, 0}, {}};
    CHECK_FALSE(dsh::validate_indicator_spec(*p, unsorted).empty());

    dsh::IndicatorSpec tight_gap{2, {0, 1}, {}};  // gap below the window
    CHECK_FALSE(dsh::validate_indicator_spec(*p, tight_gap).empty());

    dsh::IndicatorSpec too_far{1, {0, 2}, {}};  // needs K_m < min size - M = 2
    CHECK_FALSE(dsh::validate_indicator_spec(*p, too_far).empty());
}

TEST_CASE("the marker diagonal is exactly zero-one and marks shifted starts") {
    const auto p = marker_playground();
    const dsh::IndicatorSpec spec{1, {0, 1}, {}};
    const dsh::Element phi = dsh::build_phi(p, spec);

    // free points have a single block start at 1; offsets mark 1 and 2
    const Mat& at_a = phi.value(1, "a");
    CHECK(is_diag_01(at_a));
    CHECK(marked_positions(at_a, 3) == std::vector<int>{1, 2});

    const Mat& at_c = phi.value(2, "c");
    CHECK(is_diag_01(at_c));
    CHECK(marked_positions(at_c, 9) == std::vector<int>{1, 2});

    // y1 has block starts 1, 4, 7; offsets mark 1,2, 4,5, 7,8
    const Mat& at_y = phi.value(2, "y1");
    CHECK(is_diag_01(at_y));
    CHECK(marked_positions(at_y, 9) == std::vector<int>{1, 2, 4, 5, 7, 8});
}

TEST_CASE("the final window of the marker diagonal vanishes") {
    const auto p = marker_playground();
    const dsh::IndicatorSpec spec{1, {0}, {}};
    const dsh::Element phi = dsh::build_phi(p, spec);
    for (int i = 1; i <= 2; ++i)
        for (int pos = 0; pos < static_cast<int>(p->level(i).points.size()); ++pos) {
            const Mat& m = phi.at(i, pos);
            const int n = p->size_at(i);
            CHECK(m(n - 1, n - 1) == Cplx(0.0, 0.0));
        }
}

TEST_CASE("markers are elements: the gluing constraint holds exactly") {
    const auto p = marker_playground();
    const dsh::Element phi = dsh::build_phi(p, dsh::IndicatorSpec{1, {0, 1}, {}});
    CHECK(dsh::element_deviation(phi) == 0.0);
}

TEST_CASE("the guarded marker vanishes on forbidden points and certifies the rest") {
    const auto p = marker_playground();
    dsh::IndicatorSpec spec{1, {0}, {}};
    // forbid index 4 at the free point c; the start set there is {y1} only
    spec.F[{2, 4}] = {"c"};
    const auto res = dsh::build_theta(p, spec);

    CHECK(res.theta.value(2, "c")(3, 3) == Cplx(0.0, 0.0));
    CHECK(res.theta.value(2, "y1")(3, 3) == Cplx(1.0, 0.0));

    // on finite samples the guarded marker agrees with the plain one away
    // from the forbidden set, and the certificates cover the start sets
    for (const auto& [key, points] : res.certificates) {
        const auto bik = dsh::compute_bik(*p, key.first, key.second);
        for (const auto& id : bik) {
            const bool covered =
                std::find(points.begin(), points.end(), id) != points.end();
            CHECK(covered);
            CHECK(res.theta.value(key.first, id)(key.second - 1, key.second - 1) ==
                  Cplx(1.0, 0.0));
        }
    }
    CHECK(dsh::element_deviation(res.theta) == 0.0);
}

TEST_CASE("forbidden sets may not meet the start sets they would unmark") {
    const auto p = marker_playground();
    dsh::IndicatorSpec spec{1, {0}, {}};
    spec.F[{2, 4}] = {"y1"};  // y1 genuinely starts a block at 4
    CHECK_FALSE(dsh::validate_indicator_spec(*p, spec).empty());
    CHECK_THROWS_AS(dsh::build_theta(p, spec), dsh::Error);
}

TEST_CASE("wide windows with spaced offsets keep the marks apart") {
    // one level of size 8, free points only: marks at 1 and 1+M
    dsh::Level l1;
    l1.n = 8;
    l1.points = {{"p", {0.0}}, {"q", {0.5}}};
    const auto p =
        std::make_shared<dsh::Presentation>(std::vector<dsh::Level>{l1});
    const dsh::IndicatorSpec spec{3, {0, 3}, {}};
    REQUIRE(dsh::validate_indicator_spec(*p, spec).empty());
    const dsh::Element phi = dsh::build_phi(p, spec);
    CHECK(marked_positions(phi.value(1, "p"), 8) == std::vector<int>{1, 4});
    // the final M = 3 entries vanish
    for (int j = 6; j <= 8; ++j)
        CHECK(phi.value(1, "q")(j - 1, j - 1) == Cplx(0.0, 0.0));
}
