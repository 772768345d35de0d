// Diagonal maps, chains, propagation scans, quotients, and the collapse.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsh/maps.hpp"
#include "dsh/suites.hpp"

#include <set>

using dsh::Cplx;
using dsh::Mat;

namespace {

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

dsh::PresentationPtr flat_target() {
    dsh::Level l1;
    l1.n = 4;
    l1.points = {{"p", {0.1}}, {"q", {0.6}}};
    return std::make_shared<dsh::Presentation>(std::vector<dsh::Level>{l1});
}

dsh::Element sample_element(dsh::PresentationPtr p) {
    return dsh::derive_element(p, [](int i, const dsh::Point& pt) {
        const int n = (i == 1) ? 2 : 4;
        Mat m(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                m(r, c) = Cplx(pt.coord[0] + r, 0.5 * c);
        return m;
    });
}

} // namespace

TEST_CASE("the identity map fixes every element exactly") {
    const auto p = two_level();
    const auto id = dsh::identity_map(p);
    CHECK(dsh::validate_map(id).empty());
    const auto f = sample_element(p);
    const auto g = dsh::apply_map(id, f);
    CHECK(dsh::element_norm(g - f) == 0.0);
}

TEST_CASE("a diagonal map concatenates source evaluations in order") {
    const auto a = two_level();
    const auto b = flat_target();
    dsh::DiagonalMap m;
    m.source = a;
    m.target = b;
    m.table = {{
        {{1, "a"}, {1, "b"}},   // p = diag(f(a), f(b))
        {{2, "c"}},             // q = f(c)
    }};
    REQUIRE(dsh::validate_map(m).empty());

    const auto f = sample_element(a);
    const auto img = dsh::apply_map(m, f);
    CHECK(dsh::element_deviation(img) == 0.0);
    const Mat& at_p = img.value(1, "p");
    CHECK(at_p.block(0, 0, 2, 2) == f.value(1, "a"));
    CHECK(at_p.block(2, 2, 2, 2) == f.value(1, "b"));
    CHECK(dsh::max_abs(at_p.block(0, 2, 2, 2)) == 0.0);
    CHECK(img.value(1, "q") == f.value(2, "c"));

    // the map preserves products because it acts block-diagonally
    const auto ff = f * f;
    CHECK(dsh::element_norm(dsh::apply_map(m, ff) - img * img) <= 1e-12);
}

TEST_CASE("table entries may repeat source points across slots") {
    const auto a = two_level();
    const auto b = flat_target();
    dsh::DiagonalMap m;
    m.source = a;
    m.target = b;
    m.table = {{
        {{1, "a"}, {1, "a"}},   // repetition is allowed in map tables
        {{1, "b"}, {1, "b"}},
    }};
    CHECK(dsh::validate_map(m).empty());
    const auto img = dsh::apply_map(m, sample_element(a));
    CHECK(img.value(1, "p").block(0, 0, 2, 2) == img.value(1, "p").block(2, 2, 2, 2));
}

TEST_CASE("size-mismatched tables are rejected") {
    const auto a = two_level();
    const auto b = flat_target();
    dsh::DiagonalMap m;
    m.source = a;
    m.target = b;
    m.table = {{
        {{1, "a"}},             // sums to 2, target needs 4
        {{2, "c"}},
    }};
    CHECK_FALSE(dsh::validate_map(m).empty());
}

TEST_CASE("the unfolded source spectrum drops glued points") {
    const auto a = two_level();
    const auto b = flat_target();
    dsh::DiagonalMap m;
    m.source = a;
    m.target = b;
    m.table = {{
        {{2, "y"}},             // unfolds through y's decomposition
        {{2, "c"}},
    }};
    REQUIRE(dsh::validate_map(m).empty());
    const auto sp = dsh::spectrum_multimap(m, 1, "p");
    REQUIRE(sp.size() == 2);
    CHECK(sp[0].level == 1);
    CHECK(sp[0].point == "a");
    CHECK(sp[1].point == "b");
}

TEST_CASE("map composition matches applying the maps in sequence") {
    const auto chain = dsh::synthetic_ladder_chain();
    REQUIRE(dsh::validate_chain(chain).empty());
    const auto composed = dsh::compose_maps(chain.maps[1], chain.maps[0]);
    REQUIRE(dsh::validate_map(composed).empty());

    dsh::TestRng rng(11);
    const auto f = dsh::random_element(rng, chain.algebras[0]);
    const auto two_hops = dsh::apply_map(chain.maps[1], dsh::apply_map(chain.maps[0], f));
    const auto one_hop = dsh::apply_map(composed, f);
    CHECK(dsh::element_norm(two_hops - one_hop) == 0.0);
}

TEST_CASE("propagation scans find the level that absorbs a marked set") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto land_a0 = dsh::check_propagation(chain, 1, {{1, "a0"}});
    REQUIRE(land_a0.has_value());
    CHECK(*land_a0 == 2);

    // a1 is missed by some middle-level words but every top-level word
    // unfolds through one that contains it
    const auto land_a1 = dsh::check_propagation(chain, 1, {{1, "a1"}});
    REQUIRE(land_a1.has_value());
    CHECK(*land_a1 == 3);
}

TEST_CASE("size scans find the first level beyond a threshold") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto big = dsh::find_big_enough(chain, 1, 88);
    REQUIRE(big.has_value());
    CHECK(*big == 3);               // top level sizes are 92 and 184
    CHECK(dsh::find_big_enough(chain, 1, 3) == 2);
    CHECK_FALSE(dsh::find_big_enough(chain, 1, 200).has_value());
    CHECK_FALSE(dsh::find_big_enough(chain, 3, 1).has_value());
}

TEST_CASE("quotients retain saturated point sets and restrict elements") {
    const auto p = two_level();
    const auto res = dsh::quotient_presentation(
        *p, {{1, "a"}, {1, "b"}, {2, "c"}, {2, "y"}});
    CHECK(res.quotient->num_levels() == 2);
    CHECK(res.quotient->level(1).points.size() == 2);
    CHECK(res.quotient->level(2).points.size() == 2);
    CHECK(res.quotient->is_y(2, "y"));

    const auto f = sample_element(p);
    const auto rf = dsh::restrict_element(res.gamma, f);
    CHECK(dsh::element_deviation(rf) == 0.0);
    CHECK(rf.value(1, "a") == f.value(1, "a"));
    CHECK(rf.value(2, "y") == f.value(2, "y"));
}

TEST_CASE("a quotient drops emptied levels and renumbers the rest") {
    const auto p = two_level();
    const auto res = dsh::quotient_presentation(*p, {{1, "a"}});
    CHECK(res.quotient->num_levels() == 1);
    CHECK(res.quotient->level(1).points.size() == 1);
    CHECK(res.quotient->level(1).points[0].id == "a");
    CHECK(res.gamma.level_map[1] == 0);  // original level 2 was dropped

    const auto f = sample_element(p);
    const auto rf = dsh::restrict_element(res.gamma, f);
    CHECK(rf.value(1, "a") == f.value(1, "a"));
}

TEST_CASE("a glued point cannot be kept without its sources") {
    const auto p = two_level();
    CHECK_THROWS_AS(dsh::quotient_presentation(*p, {{1, "a"}, {2, "y"}}),
                    dsh::Error);
}

TEST_CASE("injectivizing a chain keeps the final algebra and hits every source") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto inj = dsh::injectivize_chain(chain);
    REQUIRE(dsh::validate_chain(inj).empty());
    REQUIRE(inj.algebras.size() == chain.algebras.size());
    CHECK(dsh::same_presentation(*inj.algebras.back(), *chain.algebras.back()));

    // every free point of every non-final algebra is reached by the next map
    for (std::size_t t = 0; t < inj.maps.size(); ++t) {
        const auto& m = inj.maps[t];
        std::set<std::pair<int, std::string>> reached;
        const auto& tgt = *m.target;
        for (int i = 1; i <= tgt.num_levels(); ++i)
            for (const auto& pt : tgt.level(i).points) {
                if (tgt.is_y(i, pt.id)) continue;
                for (const auto& sp : dsh::spectrum_multimap(m, i, pt.id))
                    reached.insert({sp.level, sp.point});
            }
        for (const auto& sp : dsh::enumerate_spectrum(*m.source))
            CHECK(reached.count({sp.level, sp.point}) == 1);
    }
}

TEST_CASE("the collapse of a homogeneous presentation is a faithful transport") {
    // level 1: free a, b; level 2: free d and glued y = a (same size)
    dsh::Level l1;
    l1.n = 3;
    l1.points = {{"a", {0.0}}, {"b", {0.3}}};
    dsh::Level l2;
    l2.n = 3;
    l2.points = {{"d", {0.6}}, {"y", {0.9}}};
    l2.y_ids = {"y"};
    l2.decomp["y"] = {{1, "a"}};
    const auto p =
        std::make_shared<dsh::Presentation>(std::vector<dsh::Level>{l1, l2});

    const auto space = dsh::collapse_homogeneous(*p);
    CHECK(space.n == 3);
    REQUIRE(space.classes.size() == 3);  // {a, y}, {b}, {d}

    dsh::TestRng rng(5);
    const auto f = dsh::random_element(rng, p);
    const auto g = dsh::random_element(rng, p);
    const auto tf = dsh::collapse_transport(space, f);
    const auto tg = dsh::collapse_transport(space, g);
    const auto tfg = dsh::collapse_transport(space, f * g);
    double worst = 0.0;
    for (std::size_t k = 0; k < tf.size(); ++k)
        worst = std::max(worst, dsh::max_abs(tfg[k] - tf[k] * tg[k]));
    CHECK(worst <= 1e-13);

    const auto lifted = dsh::collapse_lift(p, space, tf);
    CHECK(dsh::element_norm(lifted - f) == 0.0);
}

TEST_CASE("the collapse rejects non-homogeneous presentations") {
    const auto p = two_level();  // sizes 2 and 4
    CHECK_THROWS_AS(dsh::collapse_homogeneous(*p), dsh::Error);
}
