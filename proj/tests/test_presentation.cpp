// Presentations and elements: structure, derivation, block starts, arithmetic.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsh/presentation.hpp"

using dsh::Cplx;
using dsh::Mat;

namespace {

/// Two levels: level 1 holds free points a, b (size 2); level 2 holds a free
/// point c and a glued point y = diag(a-block, b-block) (size 4).
dsh::PresentationPtr two_level() {
    dsh::Level l1;
    l1.n = 2;
    l1.points = {{"a", {0.0}}, {"b", {0.25}}};
    dsh::Level l2;
    l2.n = 4;
    l2.points = {{"c", {0.5}}, {"y", {0.75}}};
    l2.y_ids = {"y"};
    l2.decomp["y"] = {{1, "a"}, {1, "b"}};
    return std::make_shared<dsh::Presentation>(std::vector<dsh::Level>{l1, l2});
}

Mat fill(int n, double base) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = Cplx(base + i, 0.1 * j);
    return m;
}

} // namespace

TEST_CASE("the two-level example validates and reports its structure") {
    const auto p = two_level();
    CHECK(p->validate().empty());
    CHECK(p->num_levels() == 2);
    CHECK(p->min_size() == 2);
    CHECK(p->max_size() == 4);
    CHECK(p->has_point(2, "y"));
    CHECK_FALSE(p->has_point(1, "y"));
    CHECK(p->point_pos(2, "c") == 0);
    CHECK(p->is_y(2, "y"));
    CHECK_FALSE(p->is_y(2, "c"));
    CHECK(p->is_y_pos(2, 1));
    REQUIRE(p->sources(2, "y").size() == 2);
    CHECK(p->sources(2, "y")[0].point == "a");
    CHECK(p->sources(2, "y")[1].point == "b");
}

TEST_CASE("block starts are the partial sums of the decomposition sizes") {
    const auto p = two_level();
    CHECK(p->block_starts(1, "a") == std::vector<int>{1});
    CHECK(p->block_starts(2, "c") == std::vector<int>{1});
    CHECK(p->block_starts(2, "y") == std::vector<int>{1, 3});
}

TEST_CASE("the start sets grade by diagonal index") {
    const auto p = two_level();
    CHECK(dsh::compute_bik(*p, 1, 1) == std::vector<std::string>{"a", "b"});
    CHECK(dsh::compute_bik(*p, 2, 1) == std::vector<std::string>{"c", "y"});
    CHECK(dsh::compute_bik(*p, 2, 2).empty());
    CHECK(dsh::compute_bik(*p, 2, 3) == std::vector<std::string>{"y"});
    CHECK(dsh::compute_bik(*p, 2, 0).empty());
}

TEST_CASE("the spectrum enumerates free points in level order") {
    const auto sp = dsh::enumerate_spectrum(*two_level());
    REQUIRE(sp.size() == 3);
    CHECK(sp[0].level == 1);
    CHECK(sp[0].point == "a");
    CHECK(sp[1].point == "b");
    CHECK(sp[2].level == 2);
    CHECK(sp[2].point == "c");
}

TEST_CASE("openness in the spectrum excludes sourced points") {
    const auto p = two_level();
    CHECK_FALSE(dsh::is_open_in_spectrum(*p, 1, {"a"}));  // y sources a
    CHECK(dsh::is_open_in_spectrum(*p, 2, {"c"}));
    CHECK_THROWS_AS(dsh::is_open_in_spectrum(*p, 2, {"y"}), dsh::Error);
    CHECK_THROWS_AS(dsh::is_open_in_spectrum(*p, 1, {"zz"}), dsh::Error);
}

TEST_CASE("derived elements satisfy the gluing constraint exactly") {
    const auto p = two_level();
    dsh::FreeValueMap vals;
    vals[{1, "a"}] = fill(2, 1.0);
    vals[{1, "b"}] = fill(2, 5.0);
    vals[{2, "c"}] = fill(4, 9.0);
    const dsh::Element f = dsh::derive_element(p, vals);

    CHECK(dsh::element_deviation(f) == 0.0);
    const Mat& y = f.value(2, "y");
    CHECK(y.block(0, 0, 2, 2) == f.value(1, "a"));
    CHECK(y.block(2, 2, 2, 2) == f.value(1, "b"));
    CHECK(dsh::max_abs(y.block(0, 2, 2, 2)) == 0.0);
    CHECK(dsh::max_abs(y.block(2, 0, 2, 2)) == 0.0);
}

TEST_CASE("replacing a value breaks the constraint measurably") {
    const auto p = two_level();
    const dsh::Element f = dsh::derive_element(
        p, [](int i, const dsh::Point&) { return fill(i == 1 ? 2 : 4, 1.0); });
    const dsh::Element g = f.with_value(1, 0, Mat::Zero(2, 2));
    CHECK(dsh::element_deviation(f) == 0.0);
    CHECK(dsh::element_deviation(g) > 0.5);
}

TEST_CASE("element arithmetic is pointwise and the norm is the sup") {
    const auto p = two_level();
    dsh::FreeValueMap vals;
    vals[{1, "a"}] = Mat::Identity(2, 2);
    vals[{1, "b"}] = 2.0 * Mat::Identity(2, 2);
    vals[{2, "c"}] = 3.0 * Mat::Identity(4, 4);
    const dsh::Element f = dsh::derive_element(p, vals);

    CHECK(dsh::element_norm(f) == doctest::Approx(3.0));
    const dsh::Element s = f + f;
    CHECK(dsh::element_norm(s) == doctest::Approx(6.0));
    CHECK(dsh::element_norm(s - f - f) == 0.0);
    const dsh::Element sq = f * f;
    CHECK(sq.value(2, "c")(0, 0) == Cplx(9.0, 0.0));
    CHECK(dsh::element_norm(dsh::adjoint(f) - f) == 0.0);  // f is self-adjoint
    CHECK(dsh::element_norm(Cplx(0.0, 1.0) * f) == doctest::Approx(3.0));
    CHECK(dsh::element_norm(dsh::zero_element(p)) == 0.0);
    CHECK(dsh::element_norm(dsh::unit_element(p)) == 1.0);
}

TEST_CASE("invertibility and inversion act pointwise") {
    const auto p = two_level();
    const dsh::Tolerances tol;
    const dsh::Element u = dsh::unit_element(p);
    CHECK(dsh::is_invertible_element(u, tol));
    CHECK_FALSE(dsh::is_invertible_element(dsh::zero_element(p), tol));

    dsh::FreeValueMap vals;
    vals[{1, "a"}] = fill(2, 1.0) + 4.0 * Mat::Identity(2, 2);
    vals[{1, "b"}] = fill(2, 2.0) + 5.0 * Mat::Identity(2, 2);
    vals[{2, "c"}] = fill(4, 0.0) + 7.0 * Mat::Identity(4, 4);
    const dsh::Element f = dsh::derive_element(p, vals);
    REQUIRE(dsh::is_invertible_element(f, tol));
    const dsh::Element inv = dsh::invert_element(f, tol);
    CHECK(dsh::element_norm(f * inv - u) <= 1e-12);
    CHECK(dsh::element_norm(inv * f - u) <= 1e-12);
    CHECK_THROWS_AS(dsh::invert_element(dsh::zero_element(p), tol), dsh::Error);
}

TEST_CASE("validate reports broken decompositions") {
    // sizes do not sum to the level size
    dsh::Level l1;
    l1.n = 2;
    l1.points = {{"a", {0.0}}};
    dsh::Level l2;
    l2.n = 5;
    l2.points = {{"y", {0.5}}};
    l2.y_ids = {"y"};
    l2.decomp["y"] = {{1, "a"}, {1, "a"}};
    const dsh::Presentation bad_sum({l1, l2});
    CHECK_FALSE(bad_sum.validate().empty());

    // repeated source point inside one decomposition
    dsh::Level l2b;
    l2b.n = 4;
    l2b.points = {{"y", {0.5}}};
    l2b.y_ids = {"y"};
    l2b.decomp["y"] = {{1, "a"}, {1, "a"}};
    const dsh::Presentation repeated({l1, l2b});
    CHECK_FALSE(repeated.validate().empty());

    // source at the same level instead of an earlier one
    dsh::Level l2c;
    l2c.n = 4;
    l2c.points = {{"c", {0.25}}, {"y", {0.5}}};
    l2c.y_ids = {"y"};
    l2c.decomp["y"] = {{2, "c"}};
    const dsh::Presentation same_level({l1, l2c});
    CHECK_FALSE(same_level.validate().empty());

    CHECK_THROWS_AS(same_level.require_valid("cli", "test"), dsh::Error);
}

TEST_CASE("structural equality compares every layer") {
    const auto p = two_level();
    const auto q = two_level();
    CHECK(dsh::same_presentation(*p, *q));

    dsh::Level l1;
    l1.n = 2;
    l1.points = {{"a", {0.0}}, {"b", {0.3}}};  // moved coordinate
    dsh::Level l2 = p->level(2);
    const dsh::Presentation moved({l1, l2});
    CHECK_FALSE(dsh::same_presentation(*p, moved));
}

TEST_CASE("nearest free point skips glued points and itself") {
    const auto p = two_level();
    const auto near_c = p->nearest_free_point(2, 0);
    CHECK_FALSE(near_c.has_value());  // c is the only free point at level 2
    const auto near_a = p->nearest_free_point(1, 0);
    REQUIRE(near_a.has_value());
    CHECK(*near_a == 1);
}
