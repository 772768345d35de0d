// The approximation pipeline: stage primitives, both end-to-end routes on
// the synthetic ladder chain, and a smoke run on the rotation chain.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsh/pipeline.hpp"
#include "dsh/dynamics.hpp"
#include "dsh/suites.hpp"

#include <algorithm>
#include <string>
#include <vector>

using dsh::Cplx;
using dsh::Mat;

namespace {

const dsh::Tolerances kTol{};

/// Element on the ladder chain's first algebra with an exact zero cross at
/// index 1 at the named point and comfortably invertible values elsewhere.
dsh::Element crossed_input(const dsh::Chain& chain, const std::string& bad) {
    return dsh::derive_element(chain.algebras[0],
                               [&bad](int, const dsh::Point& pt) {
                                   Mat m(2, 2);
                                   if (pt.id == bad) {
                                       m << Cplx(0, 0), Cplx(0, 0),
                                            Cplx(0, 0), Cplx(0.8, 0.1);
                                   } else {
                                       m << Cplx(1.2, 0), Cplx(0.3, 0.1),
                                            Cplx(0.1, 0), Cplx(0.9, 0);
                                   }
                                   return m;
                               });
}

std::vector<std::string> stage_names(const dsh::PipelineCertificate& cert) {
    std::vector<std::string> out;
    for (const auto& st : cert.stages) out.push_back(st.stage);
    return out;
}

dsh::Element recompute_image(const dsh::Chain& chain, int j, int j_prime,
                             const dsh::Element& a) {
    dsh::DiagonalMap psi = dsh::identity_map(chain.algebras[j - 1]);
    for (int t = j; t < j_prime; ++t)
        psi = dsh::compose_maps(chain.maps[t - 1], psi);
    return dsh::apply_map(psi, a);
}

} // namespace

TEST_CASE("budgets split epsilon into four equal stage allowances") {
    const auto b = dsh::make_budget(0.5);
    CHECK(b.epsilon == 0.5);
    for (double s : b.splits) CHECK(s == 0.125);
    CHECK_THROWS_AS(dsh::make_budget(0.0), dsh::Error);
    CHECK_THROWS_AS(dsh::make_budget(-1.0), dsh::Error);
}

TEST_CASE("perturbation marks existing exact crosses and only truncates") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto f = crossed_input(chain, "a0");
    const auto pr = dsh::perturb_noninvertible(f, 0.125, kTol);

    REQUIRE(pr.u_set.size() == 1);
    CHECK(pr.u_set[0].level == 1);
    CHECK(pr.u_set[0].point == "a0");
    CHECK(pr.distance <= 1e-12);
    CHECK(dsh::has_zero_cross(
        (pr.w * pr.f_prime * pr.v).value(1, "a0"), 1, kTol));
    CHECK(dsh::element_norm(pr.w - dsh::unit_element(f.pres_ptr())) == 0.0);
}

TEST_CASE("perturbation refuses invertible input") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto f = dsh::derive_element(chain.algebras[0],
                                       [](int, const dsh::Point&) {
                                           return 2.0 * Mat::Identity(2, 2);
                                       });
    try {
        dsh::perturb_noninvertible(f, 0.125, kTol);
        FAIL("expected an error");
    } catch (const dsh::Error& e) {
        CHECK(e.code() == "pipeline.no-witness");
    }
}

TEST_CASE("perturbation factorizes a nearly singular value without a cross") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto f = dsh::derive_element(
        chain.algebras[0], [](int, const dsh::Point& pt) {
            Mat m(2, 2);
            if (pt.id == "a0") {
                m << Cplx(1e-10, 0), Cplx(0, 0), Cplx(0, 0), Cplx(1.0, 0);
            } else {
                m = 1.5 * Mat::Identity(2, 2);
            }
            return m;
        });
    const auto pr = dsh::perturb_noninvertible(f, 0.125, kTol);
    REQUIRE(pr.u_set.size() == 1);
    CHECK(pr.u_set[0].point == "a0");
    CHECK(pr.distance <= 0.125);
    CHECK(dsh::has_zero_cross(
        (pr.w * pr.f_prime * pr.v).value(1, "a0"), 1, kTol));
}

TEST_CASE("the widening plan reads the landing level and spacing off the chain") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto plan = dsh::plan_far_out(chain, 1, {{1, "a0"}});
    CHECK(plan.j_land == 2);
    CHECK(plan.m == 8);            // twice the largest size at the landing level
    CHECK(plan.n_crosses == 11);   // largest size at the start, plus m + 1
    REQUIRE(plan.j_prime.has_value());
    CHECK(*plan.j_prime == 3);     // 92 > 11 * 8

    const auto plan_a1 = dsh::plan_far_out(chain, 1, {{1, "a1"}});
    CHECK(plan_a1.j_land == 3);
    CHECK_FALSE(plan_a1.j_prime.has_value());
}

TEST_CASE("entrywise shrinking installs block points without growing bandwidth") {
    const auto chain = dsh::synthetic_ladder_chain();
    dsh::TestRng rng(3);
    const auto f = dsh::random_element(rng, chain.algebras[2]);
    const auto res = dsh::block_on_set(f, 0.4, kTol);
    CHECK(res.distance <= 0.4 + 1e-12);
    CHECK(dsh::element_norm(f - res.g) <= 0.4 + 1e-12);
    for (const auto& [key, pts] : res.o_sets)
        for (const auto& id : pts)
            CHECK(dsh::has_block_point(res.g.value(key.first, id), key.second, kTol));
    for (int i = 1; i <= f.pres().num_levels(); ++i)
        for (int pos = 0; pos < static_cast<int>(f.pres().level(i).points.size());
             ++pos)
            CHECK(dsh::bandwidth(res.g.at(i, pos), kTol) <=
                  dsh::bandwidth(f.at(i, pos), kTol));
}

TEST_CASE("singular-value lifting clears the floor and moves little") {
    const auto chain = dsh::synthetic_ladder_chain();
    dsh::TestRng rng(9);
    const auto f = dsh::random_element(rng, chain.algebras[1]);
    const auto h = dsh::lift_singular_floor(f, 0.2);
    CHECK(dsh::element_norm(h - f) <= 0.2 + 1e-12);
    CHECK(dsh::element_deviation(h) <= 1e-14);
    for (int pos = 0; pos < 4; ++pos)
        CHECK(dsh::singular_floor(h.at(1, pos)) >= 0.2 - 1e-12);
}

TEST_CASE("the additive finisher requires strict triangularity and adds a unit") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto t = dsh::derive_element(chain.algebras[1],
                                       [](int, const dsh::Point& pt) {
                                           Mat m = Mat::Zero(4, 4);
                                           m(1, 0) = Cplx(pt.coord[0], 1.0);
                                           m(3, 1) = Cplx(0.5, 0.0);
                                           return m;
                                       });
    const auto h = dsh::finish_invertible(t, 0.3, kTol);
    CHECK(dsh::is_invertible_element(h, kTol));
    CHECK(dsh::element_norm(h - t) == doctest::Approx(0.3));

    const auto not_lower = dsh::unit_element(chain.algebras[1]);
    CHECK_THROWS_AS(dsh::finish_invertible(not_lower, 0.3, kTol), dsh::Error);
}

TEST_CASE("a cross away from the spine rides the conjugation ladder") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto a = crossed_input(chain, "a0");
    const auto cert = dsh::approximate_invertible(chain, 1, a, 0.5, kTol);

    CHECK_FALSE(cert.already_invertible);
    CHECK(cert.route == "ladder");
    CHECK(cert.j == 1);
    CHECK(cert.j_prime == 3);
    CHECK(cert.m == 8);
    CHECK(cert.n_crosses == 11);
    CHECK(stage_names(cert) ==
          std::vector<std::string>{"perturb", "widen", "block", "shift",
                                   "triangularize", "finish"});
    for (const auto& st : cert.stages) CHECK(st.distance <= 0.125 + 1e-12);

    REQUIRE(cert.a_prime.has_value());
    REQUIRE(cert.nilpotent.has_value());
    CHECK(cert.total_distance <= 0.5);
    CHECK(cert.floor > kTol.tau_sing);
    CHECK(cert.nilpotent_residual <= 1e-9);
    CHECK(cert.max_unitary_defect <= 1e-10);
    CHECK(cert.bandwidth_after_widen <= 9);   // max start size plus spacing minus one
    CHECK(cert.bandwidth_after_block <= cert.bandwidth_after_widen);
    CHECK(cert.bandwidth_after_shift <= cert.n_crosses);

    // recompute the certificate distance from the raw outputs
    const auto image = recompute_image(chain, 1, cert.j_prime, a);
    const double total = dsh::element_norm(image - *cert.a_prime);
    CHECK(std::abs(total - cert.total_distance) <= 1e-12);
    CHECK(total <= 0.5);
    CHECK(dsh::is_invertible_element(*cert.a_prime, kTol));

    // the nilpotent stage output is strictly lower triangular pointwise,
    // so its n-th power vanishes
    const auto& t = *cert.nilpotent;
    for (int i = 1; i <= t.pres().num_levels(); ++i) {
        const int n = t.pres().size_at(i);
        for (int pos = 0; pos < static_cast<int>(t.pres().level(i).points.size());
             ++pos) {
            Mat power = Mat::Identity(n, n);
            Mat base = t.at(i, pos);
            for (int e = n; e > 0; e /= 2) {   // binary exponentiation
                if (e % 2 == 1) power = power * base;
                if (e > 1) base = base * base;
            }
            CHECK(dsh::max_abs(power) <= 1e-9);
        }
    }
}

TEST_CASE("a cross that only lands at the top level takes the factorization route") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto a = crossed_input(chain, "a1");
    const auto cert = dsh::approximate_invertible(chain, 1, a, 0.5, kTol);

    CHECK(cert.route == "svd");
    CHECK(cert.j_prime == 3);
    CHECK(stage_names(cert) ==
          std::vector<std::string>{"perturb", "truncate", "triangularize",
                                   "finish"});
    for (const auto& st : cert.stages) CHECK(st.distance <= 0.125 + 1e-12);
    CHECK(cert.total_distance <= 0.5);
    CHECK(cert.floor > kTol.tau_sing);
    CHECK(cert.nilpotent_residual <= 1e-9);
    CHECK(cert.max_unitary_defect <= 1e-10);

    const auto image = recompute_image(chain, 1, cert.j_prime, a);
    CHECK(dsh::element_norm(image - *cert.a_prime) <= 0.5);
    CHECK(dsh::is_invertible_element(*cert.a_prime, kTol));
}

TEST_CASE("invertible input short-circuits with a zero-distance certificate") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto a = dsh::derive_element(chain.algebras[0],
                                       [](int, const dsh::Point&) {
                                           return 1.5 * Mat::Identity(2, 2);
                                       });
    const auto cert = dsh::approximate_invertible(chain, 1, a, 0.5, kTol);
    CHECK(cert.already_invertible);
    CHECK(cert.route == "none");
    CHECK(cert.j_prime == 1);
    CHECK(cert.total_distance == 0.0);
    CHECK(cert.stages.empty());
    CHECK(cert.floor == doctest::Approx(1.5));
}

TEST_CASE("a marked set that never propagates exhausts the chain") {
    // two algebras; the second never sees a1 because both its words only
    // draw on a0
    dsh::Level l1;
    l1.n = 2;
    l1.points = {{"a0", {0.0}}, {"a1", {0.5}}};
    const auto p1 =
        std::make_shared<dsh::Presentation>(std::vector<dsh::Level>{l1});
    dsh::Level l2;
    l2.n = 4;
    l2.points = {{"b0", {0.1}}, {"b1", {0.6}}};
    const auto p2 =
        std::make_shared<dsh::Presentation>(std::vector<dsh::Level>{l2});
    dsh::Chain chain;
    chain.algebras = {p1, p2};
    dsh::DiagonalMap m;
    m.source = p1;
    m.target = p2;
    m.table = {{
        {{1, "a0"}, {1, "a0"}},
        {{1, "a0"}, {1, "a0"}},
    }};
    chain.maps = {m};
    REQUIRE(dsh::validate_chain(chain).empty());

    const auto a = dsh::derive_element(p1, [](int, const dsh::Point& pt) {
        Mat v(2, 2);
        if (pt.id == "a1") {
            v << Cplx(0, 0), Cplx(0, 0), Cplx(0, 0), Cplx(1, 0);
        } else {
            v = Mat::Identity(2, 2);
        }
        return v;
    });
    try {
        dsh::approximate_invertible(chain, 1, a, 0.5, kTol);
        FAIL("expected an error");
    } catch (const dsh::Error& e) {
        CHECK(e.code() == "pipeline.chain-exhausted");
    }
}

TEST_CASE("epsilon must be positive") {
    const auto chain = dsh::synthetic_ladder_chain();
    const auto a = crossed_input(chain, "a0");
    CHECK_THROWS_AS(dsh::approximate_invertible(chain, 1, a, 0.0, kTol),
                    dsh::Error);
}

TEST_CASE("a seeded singular element on the rotation chain is approximated") {
    const auto sys = dsh::fibonacci_system();
    const auto chain = dsh::injectivize_chain(dsh::build_chain(sys, 6));
    const auto a =
        dsh::seeded_noninvertible(sys, 0, chain.algebras[0], 7);
    CHECK_FALSE(dsh::is_invertible_element(a, kTol));
    CHECK(dsh::element_deviation(a) == 0.0);

    const auto cert = dsh::approximate_invertible(chain, 1, a, 0.5, kTol);
    CHECK(cert.route == "svd");
    CHECK(cert.total_distance <= 0.5);
    CHECK(cert.floor > kTol.tau_sing);
    CHECK(cert.nilpotent_residual <= 1e-9);
    CHECK(cert.max_unitary_defect <= 1e-10);
    REQUIRE(cert.a_prime.has_value());
    CHECK(dsh::is_invertible_element(*cert.a_prime, kTol));
}
