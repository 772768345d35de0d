/* src/pipeline.cpp — the stable-rank-one approximation pipeline.
 *
 * Stage order and budgets are documented in dsh/pipeline.hpp.  Two global
 * conventions govern the numerics here:
 *
 *   - "exact zero" means modulus <= tau_zero, and stages that later rely on
 *     literal zeros truncate first (chop_element), recording the truncation
 *     as part of their measured stage distance;
 *   - every certificate number is recomputed from the raw stage outputs at
 *     the end, never copied from intermediate bookkeeping.
 */
#include "dsh/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

namespace dsh {

namespace {

constexpr const char* kModule = "srpipeline";

/// Visits every (level, position) pair of the presentation, Y points included.
template <typename Fn>
void for_each_point(const Presentation& p, Fn&& fn) {
    for (int i = 1; i <= p.num_levels(); ++i) {
        const int count = static_cast<int>(p.level(i).points.size());
        for (int pos = 0; pos < count; ++pos) fn(i, pos);
    }
}

/// All (level, id) pairs used as a decomposition source anywhere in p.
std::set<std::pair<int, std::string>> sourced_points(const Presentation& p) {
    std::set<std::pair<int, std::string>> out;
    for (int i = 1; i <= p.num_levels(); ++i) {
        for (const auto& [y_id, srcs] : p.level(i).decomp) {
            (void)y_id;
            for (const Source& s : srcs) out.insert({s.level, s.point});
        }
    }
    return out;
}

/// diag(1, 0, ..., 0).
Mat cross_marker(int n) {
    Mat m = Mat::Zero(n, n);
    m(0, 0) = Cplx(1.0, 0.0);
    return m;
}

/// The composite chain map from level j to level jp (requires j < jp).
DiagonalMap compose_range(const Chain& c, int j, int jp) {
    DiagonalMap m = c.maps[static_cast<std::size_t>(j - 1)];
    for (int t = j; t <= jp - 2; ++t)
        m = compose_maps(c.maps[static_cast<std::size_t>(t)], m);
    return m;
}

double min_floor(const Element& f) {
    double floor = std::numeric_limits<double>::infinity();
    for_each_point(f.pres(), [&](int i, int pos) {
        floor = std::min(floor, singular_floor(f.at(i, pos)));
    });
    return floor;
}

int max_bandwidth(const Element& f, const Tolerances& tol) {
    int r = 0;
    for_each_point(f.pres(), [&](int i, int pos) {
        r = std::max(r, bandwidth(f.at(i, pos), tol));
    });
    return r;
}

double max_defect(const Element& u) {
    double d = 0.0;
    for_each_point(u.pres(), [&](int i, int pos) {
        d = std::max(d, unitary_defect(u.at(i, pos)));
    });
    return d;
}

/// Largest modulus found on or above the diagonal anywhere in f.
double upper_residual(const Element& f) {
    double worst = 0.0;
    for_each_point(f.pres(), [&](int i, int pos) {
        const Mat& m = f.at(i, pos);
        const int n = static_cast<int>(m.rows());
        for (int r = 0; r < n; ++r)
            for (int col = r; col < n; ++col)
                worst = std::max(worst, std::abs(m(r, col)));
    });
    return worst;
}

/// Max over points of ||value^n|| (n the level's matrix size), with an early
/// exit once a power is exactly zero.
double nilpotent_residual(const Element& t) {
    double worst = 0.0;
    for_each_point(t.pres(), [&](int i, int pos) {
        const Mat& m = t.at(i, pos);
        const int n = static_cast<int>(m.rows());
        Mat acc = m;
        for (int k = 1; k < n && max_abs(acc) > 0.0; ++k) acc = acc * m;
        worst = std::max(worst, op_norm(acc));
    });
    return worst;
}

/// True iff every window of `width` consecutive diagonal entries of d holds
/// an entry exceeding 1/2 (the marker images are exact 0/1 diagonals).
bool diagonal_hits_every_window(const Mat& d, int width) {
    const int n = static_cast<int>(d.rows());
    int last = 0;
    for (int k = 1; k <= n; ++k) {
        if (d(k - 1, k - 1).real() > 0.5) {
            if (k - last > width) return false;
            last = k;
        }
    }
    return n + 1 - last <= width;
}

/// The widening conjugator at one point: for every diagonal index k carrying
/// the marker, elementary paths spread the cross marked at k to the offsets
/// inside its width-m window that the pulled-back cross marker occupies.
Mat marker_steered_conjugator(const Mat& theta, const Mat& delta, int m_gap) {
    const int n = static_cast<int>(theta.rows());
    Mat w = Mat::Identity(n, n);
    for (int k = 1; k <= n - m_gap; ++k) {
        const double tk = theta(k - 1, k - 1).real();
        if (tk <= 0.0) continue;                    // whole factor is exactly 1
        Mat uk = Mat::Identity(n, n);
        for (int t = 1; t <= m_gap - 1; ++t) {
            const double xi = tk * delta(k + t - 1, k + t - 1).real();
            if (xi <= 0.0) continue;                // elementary factor is exactly 1
            uk = uk * path_u(k, k + t, xi, n);
        }
        w = w * uk;
    }
    return w;
}

/// Per-level openness check of a marked spectrum set ("pipeline.internal"
/// because the constructions only ever mark free, never-sourced points).
void require_open(const Presentation& p, const std::vector<SpectrumPoint>& u,
                  const char* operation) {
    std::map<int, std::vector<std::string>> by_level;
    for (const SpectrumPoint& sp : u) by_level[sp.level].push_back(sp.point);
    for (const auto& [lvl, ids] : by_level)
        require(is_open_in_spectrum(p, lvl, ids), "pipeline.internal", kModule,
                operation, "marked set must be open in the spectrum",
                "level " + std::to_string(lvl));
}

/// Shared hypothesis walk for the two conjugation stages: every nonempty
/// decomposition-start set needs a certificate set containing it, the given
/// predicate must hold on every certificate point, and the forbidden sets of
/// the marker spec are the complements of the certificate sets.  A missing
/// certificate set for an empty start set needs no forbidden entry: the
/// block-start marker already vanishes identically at that index.
template <typename Check>
IndicatorSpec certified_marker_spec(const Presentation& p, int gap,
                                    const CertificateSets& u_sets,
                                    const char* operation, Check&& check) {
    IndicatorSpec spec;
    spec.M = gap;
    spec.K = {0};
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        for (int k = 1; k <= lv.n; ++k) {
            const auto it = u_sets.find({i, k});
            const std::vector<std::string> bik = compute_bik(p, i, k);
            if (!bik.empty()) {
                require(it != u_sets.end(), "pipeline.hypothesis-failed", kModule,
                        operation,
                        "every nonempty decomposition-start set needs a certificate set",
                        "level " + std::to_string(i) + ", index " + std::to_string(k));
            }
            if (it == u_sets.end()) continue;
            const std::set<std::string> u(it->second.begin(), it->second.end());
            for (const std::string& id : bik)
                require(u.count(id) != 0, "pipeline.hypothesis-failed", kModule,
                        operation, "certificate set must contain the start set",
                        "level " + std::to_string(i) + ", index " + std::to_string(k) +
                            ", point '" + id + "'");
            for (const std::string& id : u) check(i, k, id);
            std::vector<std::string> forbidden;
            for (const Point& pt : lv.points)
                if (u.count(pt.id) == 0) forbidden.push_back(pt.id);
            if (!forbidden.empty()) spec.F[{i, k}] = std::move(forbidden);
        }
    }
    return spec;
}

} // namespace

PipelineBudget make_budget(double eps) {
    require(eps > 0.0, "pipeline.bad-input", kModule, "make_budget",
            "epsilon must be positive");
    PipelineBudget b;
    b.epsilon = eps;
    const double quarter = eps / 4.0;
    b.splits = {quarter, quarter, quarter, quarter};
    return b;
}

Element chop_element(const Element& f, double tau) {
    std::vector<std::vector<Mat>> values = f.values();
    for (auto& level : values)
        for (Mat& m : level) m = chop(m, tau);
    return Element(f.pres_ptr(), std::move(values));
}

Element lift_singular_floor(const Element& f, double floor) {
    require(floor > 0.0, "pipeline.bad-input", kModule, "lift_singular_floor",
            "floor must be positive");
    std::vector<std::vector<Mat>> values = f.values();
    for (auto& level : values) {
        for (Mat& m : level) {
            Svd s = svd_decompose(m);
            const Eigen::VectorXd lifted = s.sigma.cwiseMax(floor);
            m = s.u * lifted.asDiagonal() * s.v.adjoint();
        }
    }
    return Element(f.pres_ptr(), std::move(values));
}

PerturbResult perturb_noninvertible(const Element& f, double eps,
                                    const Tolerances& tol) {
    tol.validate();
    require(eps > 0.0, "pipeline.bad-input", kModule, "perturb_noninvertible",
            "budget must be positive");
    const Presentation& p = f.pres();
    const PresentationPtr pp = f.pres_ptr();
    require(!is_invertible_element(f, tol), "pipeline.no-witness", kModule,
            "perturb_noninvertible",
            "f must have an evaluation with singular floor at or below tau_sing");
    const auto sourced = sourced_points(p);

    // Fast path: exact crosses at index 1 already sit at free, never-sourced
    // points; truncation is the only movement and the identity pair w = v = 1
    // satisfies the cross property outright.
    std::vector<SpectrumPoint> marked;
    std::set<std::pair<int, std::string>> marked_keys;
    for_each_point(p, [&](int i, int pos) {
        if (p.is_y_pos(i, pos)) return;
        const std::string& id = p.point(i, pos).id;
        if (sourced.count({i, id})) return;
        if (has_zero_cross(f.at(i, pos), 1, tol)) {
            marked.push_back({i, id});
            marked_keys.insert({i, id});
        }
    });
    if (!marked.empty()) {
        Element fp = chop_element(f, tol.tau_zero);
        const double dist = element_norm(subtract(f, fp));
        require(dist <= eps, "pipeline.budget-too-small", kModule,
                "perturb_noninvertible",
                "truncation at tau_zero must fit the budget",
                std::to_string(dist) + " vs " + std::to_string(eps));
        Element one = unit_element(pp);
        Element delta = derive_element(pp, [&](int i, const Point& pt) -> Mat {
            const int n = p.size_at(i);
            return marked_keys.count({i, pt.id}) ? cross_marker(n)
                                                 : Mat(Mat::Zero(n, n));
        });
        require_open(p, marked, "perturb_noninvertible");
        return {std::move(fp), one, one, std::move(delta), std::move(marked), dist};
    }

    // Generic path: locate the least-invertible free evaluation ...
    int wi = 0, wpos = -1;
    double wfloor = std::numeric_limits<double>::infinity();
    for_each_point(p, [&](int i, int pos) {
        if (p.is_y_pos(i, pos)) return;
        const double s = singular_floor(f.at(i, pos));
        if (s < wfloor) {
            wfloor = s;
            wi = i;
            wpos = pos;
        }
    });

    // ... and, when that point only ever appears inside later decompositions,
    // climb to the largest level gluing it and patch near the glued value
    // (the glued evaluation contains the witness block, so it is just as
    // non-invertible, and the patch set below stays clear of constraints).
    int lvl = wi;
    Mat target = f.at(wi, wpos);
    const std::string wid = p.point(wi, wpos).id;
    if (sourced.count({wi, wid})) {
        int best_level = 0;
        std::string best_y;
        for (int i2 = wi + 1; i2 <= p.num_levels(); ++i2) {
            if (i2 <= best_level) continue;
            for (const std::string& y_id : p.level(i2).y_ids) {
                bool hits = false;
                for (const Source& s : p.sources(i2, y_id))
                    if (s.level == wi && s.point == wid) hits = true;
                if (hits) {
                    best_level = i2;
                    best_y = y_id;
                    break;
                }
            }
        }
        require(best_level > 0, "pipeline.internal", kModule,
                "perturb_noninvertible", "a sourced point must have a gluing level");
        lvl = best_level;
        target = f.value(lvl, best_y);
    }

    ZeroCrossFactorization zcf = zero_cross_factorize(target, tol);
    require(zcf.cost <= eps, "pipeline.budget-too-small", kModule,
            "perturb_noninvertible", "the witness truncation must fit the budget",
            std::to_string(zcf.cost) + " vs " + std::to_string(eps));

    // Patch every free, never-sourced point of the level whose value sits
    // within the budget of the truncated witness value.
    std::vector<SpectrumPoint> u;
    std::set<std::string> u_ids;
    {
        const Level& lv = p.level(lvl);
        for (int pos = 0; pos < static_cast<int>(lv.points.size()); ++pos) {
            if (p.is_y_pos(lvl, pos)) continue;
            const std::string& id = lv.points[pos].id;
            if (sourced.count({lvl, id})) continue;
            if (op_norm(f.at(lvl, pos) - zcf.m_trunc) <= eps) {
                u.push_back({lvl, id});
                u_ids.insert(id);
            }
        }
    }
    require(!u.empty(), "pipeline.no-free-neighborhood", kModule,
            "perturb_noninvertible",
            "a free, never-sourced point within budget of the witness value must exist",
            "level " + std::to_string(lvl));

    const auto patched = [&](int i, const std::string& id) {
        return i == lvl && u_ids.count(id) != 0;
    };
    Element fp = derive_element(pp, [&](int i, const Point& pt) -> Mat {
        return patched(i, pt.id) ? zcf.m_trunc : f.value(i, pt.id);
    });
    Element w_el = derive_element(pp, [&](int i, const Point& pt) -> Mat {
        const int n = p.size_at(i);
        return patched(i, pt.id) ? zcf.w : Mat(Mat::Identity(n, n));
    });
    Element v_el = derive_element(pp, [&](int i, const Point& pt) -> Mat {
        const int n = p.size_at(i);
        return patched(i, pt.id) ? zcf.v : Mat(Mat::Identity(n, n));
    });
    Element delta = derive_element(pp, [&](int i, const Point& pt) -> Mat {
        const int n = p.size_at(i);
        return patched(i, pt.id) ? cross_marker(n) : Mat(Mat::Zero(n, n));
    });
    const double dist = element_norm(subtract(f, fp));
    require(dist <= eps, "pipeline.internal", kModule, "perturb_noninvertible",
            "patch distance must sit within the budget by construction");
    require_open(p, u, "perturb_noninvertible");
    return {std::move(fp), std::move(w_el), std::move(v_el), std::move(delta),
            std::move(u), dist};
}

WideningPlan plan_far_out(const Chain& c, int j,
                          const std::vector<SpectrumPoint>& u_set) {
    require(j >= 1 && j <= static_cast<int>(c.algebras.size()),
            "pipeline.bad-input", kModule, "plan_far_out", "level index in range");
    const std::optional<int> j_land = check_propagation(c, j, u_set);
    require(j_land.has_value(), "pipeline.chain-exhausted", kModule, "plan_far_out",
            "some later level must have every spectrum point unfolding into the marked set");
    WideningPlan plan;
    plan.j_land = *j_land;
    plan.m = 2 * c.algebras[static_cast<std::size_t>(*j_land - 1)]->max_size();
    plan.n_crosses =
        c.algebras[static_cast<std::size_t>(j - 1)]->max_size() + plan.m + 1;
    plan.j_prime = find_big_enough(c, *j_land, plan.n_crosses * plan.m);
    return plan;
}

FarOutResult far_out(const Chain& c, int j, const PerturbResult& pr,
                     const Tolerances& tol) {
    tol.validate();
    const WideningPlan plan = plan_far_out(c, j, pr.u_set);
    require(plan.j_prime.has_value(), "pipeline.chain-exhausted", kModule, "far_out",
            "some later level must have min matrix size above the cross span",
            "need min size > " + std::to_string(plan.n_crosses * plan.m));
    const int jp = *plan.j_prime;
    const PresentationPtr ap = c.algebras[static_cast<std::size_t>(jp - 1)];
    const DiagonalMap psi = compose_range(c, j, jp);

    const Element f_img = apply_map(psi, pr.f_prime);
    const Element delta_img = apply_map(psi, pr.delta);

    // The pulled-back cross marker must occupy every window of m consecutive
    // diagonal entries: each landing-level block is at most m/2 wide and
    // holds a marked entry because its spectrum point unfolds into the
    // marked set.
    for_each_point(*ap, [&](int i, int pos) {
        require(diagonal_hits_every_window(delta_img.at(i, pos), plan.m),
                "pipeline.internal", kModule, "far_out",
                "pulled-back cross marker occupies every spacing window",
                "level " + std::to_string(i) + ", point '" +
                    ap->point(i, pos).id + "'");
    });

    // Block-start markers with one cross per window, n_crosses windows deep.
    IndicatorSpec spec;
    spec.M = plan.m;
    spec.K.resize(static_cast<std::size_t>(plan.n_crosses));
    for (int a = 0; a < plan.n_crosses; ++a)
        spec.K[static_cast<std::size_t>(a)] = a * plan.m;
    const auto spec_bad = validate_indicator_spec(*ap, spec);
    require(spec_bad.empty(), "pipeline.internal", kModule, "far_out",
            "marker spec must validate on the landing level",
            spec_bad.empty() ? std::string() : spec_bad.front());
    ThetaResult th = build_theta(ap, spec);

    std::vector<std::vector<Mat>> w_values(ap->levels().size());
    for (int i = 1; i <= ap->num_levels(); ++i)
        w_values[static_cast<std::size_t>(i - 1)].resize(
            ap->level(i).points.size());
    for_each_point(*ap, [&](int i, int pos) {
        w_values[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(pos)] =
            marker_steered_conjugator(th.theta.at(i, pos), delta_img.at(i, pos),
                                      plan.m);
    });
    Element big_w(ap, std::move(w_values));

    Element v_left = multiply(big_w, apply_map(psi, pr.w));
    Element v_right = multiply(apply_map(psi, pr.v), adjoint(big_w));
    Element b = multiply(multiply(v_left, f_img), v_right);

    return {jp,    plan.m, plan.n_crosses, std::move(big_w), std::move(v_left),
            std::move(v_right), std::move(b), std::move(th.certificates)};
}

BlockOnSetResult block_on_set(const Element& f, double eps,
                              const Tolerances& tol) {
    tol.validate();
    require(eps > 0.0, "pipeline.bad-input", kModule, "block_on_set",
            "budget must be positive");
    const Presentation& p = f.pres();
    const int big = p.max_size();
    const double delta = eps / (static_cast<double>(big) * static_cast<double>(big));

    // Entrywise shrink toward zero by delta: entries at or below delta become
    // exact zeros, so zero crosses survive and bandwidth never grows.
    std::vector<std::vector<Mat>> values = f.values();
    for (auto& level : values) {
        for (Mat& m : level) {
            for (int r = 0; r < m.rows(); ++r) {
                for (int col = 0; col < m.cols(); ++col) {
                    const Cplx z = m(r, col);
                    const double a = std::abs(z);
                    m(r, col) = a <= delta ? Cplx(0.0, 0.0) : z * ((a - delta) / a);
                }
            }
        }
    }
    Element g(f.pres_ptr(), std::move(values));

    // Certificates: all points (glued ones included) where the shrunk value
    // splits as a direct sum at k; each contains the decomposition-start set.
    CertificateSets o_sets;
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        for (int k = 1; k <= lv.n; ++k) {
            std::vector<std::string> pts;
            for (int pos = 0; pos < static_cast<int>(lv.points.size()); ++pos)
                if (has_block_point(g.at(i, pos), k, tol))
                    pts.push_back(lv.points[pos].id);
            if (pts.empty()) continue;
            const std::set<std::string> have(pts.begin(), pts.end());
            for (const std::string& id : compute_bik(p, i, k))
                require(have.count(id) != 0, "pipeline.internal", kModule,
                        "block_on_set",
                        "certificate must contain the decomposition-start set",
                        "level " + std::to_string(i) + ", index " + std::to_string(k));
            o_sets[{i, k}] = std::move(pts);
        }
    }
    const double dist = element_norm(subtract(f, g));
    require(dist <= eps, "pipeline.internal", kModule, "block_on_set",
            "shrink distance must sit within the budget by construction");
    return {std::move(g), std::move(o_sets), dist};
}

CrossShiftResult cross_shift(const Element& g, int m, int n_crosses,
                             const CertificateSets& u_sets,
                             const Tolerances& tol) {
    tol.validate();
    require(m >= 1 && n_crosses >= 1, "pipeline.bad-input", kModule, "cross_shift",
            "spacing and cross count must be positive");
    const Presentation& p = g.pres();
    const int span = n_crosses * m;
    require(span < p.min_size(), "pipeline.spacing-too-large", kModule,
            "cross_shift", "cross span must stay below the smallest matrix size",
            std::to_string(span) + " vs " + std::to_string(p.min_size()));

    const IndicatorSpec spec = certified_marker_spec(
        p, span, u_sets, "cross_shift", [&](int i, int k, const std::string& id) {
            const Mat& val = g.value(i, id);
            require(has_block_point(val, k, tol), "pipeline.hypothesis-failed",
                    kModule, "cross_shift",
                    "block point at the start index on the certificate set",
                    "level " + std::to_string(i) + ", index " + std::to_string(k) +
                        ", point '" + id + "'");
            for (int a = 0; a < n_crosses; ++a)
                require(has_zero_cross(val, k + a * m, tol),
                        "pipeline.hypothesis-failed", kModule, "cross_shift",
                        "spaced zero crosses on the certificate set",
                        "level " + std::to_string(i) + ", index " +
                            std::to_string(k + a * m) + ", point '" + id + "'");
        });
    ThetaResult th = build_theta(g.pres_ptr(), spec);

    // The in-window mover: at parameter 1 it collects crosses spaced m apart
    // to the first n_crosses indices of a span-wide window.
    std::vector<int> z(static_cast<std::size_t>(n_crosses));
    for (int t = 0; t < n_crosses; ++t)
        z[static_cast<std::size_t>(t)] = 1 + t * m;
    const Mat mover = cross_mover(z, 1.0, span);

    std::vector<std::vector<Mat>> values(p.levels().size());
    for (int i = 1; i <= p.num_levels(); ++i)
        values[static_cast<std::size_t>(i - 1)].resize(p.level(i).points.size());
    for_each_point(p, [&](int i, int pos) {
        const Mat& theta = th.theta.at(i, pos);
        const int n = p.size_at(i);
        Mat v = Mat::Identity(n, n);
        for (int k = 1; k <= n - span; ++k) {
            if (theta(k - 1, k - 1).real() <= 0.5) continue;   // factor is exactly 1
            Mat uk = Mat::Identity(n, n);
            uk.block(k - 1, k - 1, span, span) = mover;
            v = v * uk;
        }
        values[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(pos)] =
            std::move(v);
    });
    Element v_el(g.pres_ptr(), std::move(values));
    return {std::move(v_el), std::move(th.certificates)};
}

Element lower_triangularize(const Element& g2, int n_crosses,
                            const CertificateSets& u_sets,
                            const Tolerances& tol) {
    tol.validate();
    const Presentation& p = g2.pres();
    require(n_crosses >= 1 && n_crosses < p.min_size(), "pipeline.spacing-too-large",
            kModule, "lower_triangularize",
            "cross count must stay below the smallest matrix size",
            std::to_string(n_crosses) + " vs " + std::to_string(p.min_size()));
    for_each_point(p, [&](int i, int pos) {
        require(bandwidth(g2.at(i, pos), tol) <= n_crosses,
                "pipeline.hypothesis-failed", kModule, "lower_triangularize",
                "bandwidth at most the cross count everywhere",
                "level " + std::to_string(i) + ", point '" + p.point(i, pos).id +
                    "'");
    });

    const IndicatorSpec spec = certified_marker_spec(
        p, n_crosses, u_sets, "lower_triangularize",
        [&](int i, int k, const std::string& id) {
            const Mat& val = g2.value(i, id);
            for (int t = 0; t < n_crosses; ++t)
                require(has_zero_cross(val, k + t, tol), "pipeline.hypothesis-failed",
                        kModule, "lower_triangularize",
                        "contiguous zero crosses on the certificate set",
                        "level " + std::to_string(i) + ", index " +
                            std::to_string(k + t) + ", point '" + id + "'");
        });
    ThetaResult th = build_theta(g2.pres_ptr(), spec);

    std::vector<std::vector<Mat>> values(p.levels().size());
    for (int i = 1; i <= p.num_levels(); ++i)
        values[static_cast<std::size_t>(i - 1)].resize(p.level(i).points.size());
    for_each_point(p, [&](int i, int pos) {
        const Mat& theta = th.theta.at(i, pos);
        const int n = p.size_at(i);
        std::vector<double> xi(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            xi[static_cast<std::size_t>(k)] = theta(k, k).real();
        values[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(pos)] =
            lt_family(xi, PathParams{n, n_crosses});
    });
    Element v_el(g2.pres_ptr(), std::move(values));

    const double residual = upper_residual(multiply(g2, v_el));
    require(residual <= tol.tau_zero, "pipeline.triangularization-failed", kModule,
            "lower_triangularize",
            "the conjugated product must vanish on and above the diagonal",
            "residual " + std::to_string(residual));
    return v_el;
}

Element finish_invertible(const Element& t, double eps, const Tolerances& tol) {
    tol.validate();
    require(eps > 0.0, "pipeline.bad-input", kModule, "finish_invertible",
            "epsilon must be positive");
    require(upper_residual(t) <= tol.tau_zero, "pipeline.not-triangular", kModule,
            "finish_invertible", "input must be strictly lower triangular");
    Element h = add(t, scale(Cplx(eps, 0.0), unit_element(t.pres_ptr())));
    // The spectrum of h is {eps} in exact arithmetic; at large matrix sizes
    // the numeric singular floor can still collapse, so verify it honestly.
    require(is_invertible_element(h, tol), "pipeline.finish-not-invertible",
            kModule, "finish_invertible",
            "additive finisher must clear the singular floor",
            "floor " + std::to_string(min_floor(h)));
    return h;
}

namespace {

/// The conjugation ladder at a level whose minimum matrix size exceeds the
/// cross span: widen, install block points, group the crosses, triangularize,
/// then lift the singular values.
void route_ladder(const Chain& c, int j, const Element& a,
                  const PerturbResult& pr, const Tolerances& tol, double step,
                  PipelineCertificate& cert) {
    FarOutResult fo = far_out(c, j, pr, tol);
    cert.route = "ladder";
    cert.j_prime = fo.j_prime;
    cert.m = fo.m;
    cert.n_crosses = fo.n_crosses;
    cert.stages.push_back({"widen", 0.0});

    const int bw_cap = a.pres().max_size() + fo.m - 1;
    cert.bandwidth_after_widen = max_bandwidth(fo.b, tol);
    require(cert.bandwidth_after_widen <= bw_cap, "pipeline.internal", kModule,
            "approximate_invertible",
            "bandwidth after widening at most max size plus spacing minus one",
            std::to_string(cert.bandwidth_after_widen) + " vs " +
                std::to_string(bw_cap));

    BlockOnSetResult bo = block_on_set(fo.b, step, tol);
    cert.stages.push_back({"block", element_norm(subtract(fo.b, bo.g))});
    for_each_point(bo.g.pres(), [&](int i, int pos) {
        require(bandwidth(bo.g.at(i, pos), tol) <= bandwidth(fo.b.at(i, pos), tol),
                "pipeline.internal", kModule, "approximate_invertible",
                "bandwidth must not grow under the block stage");
    });
    cert.bandwidth_after_block = max_bandwidth(bo.g, tol);

    // Both certificate families contain the decomposition-start sets, so
    // their intersection still does; on it the crosses and the block point
    // hold simultaneously.
    CertificateSets hyp;
    for (const auto& [key, pts] : fo.certificates) {
        const auto it = bo.o_sets.find(key);
        require(it != bo.o_sets.end(), "pipeline.internal", kModule,
                "approximate_invertible",
                "block certificates must cover every widening certificate key");
        const std::set<std::string> in_block(it->second.begin(), it->second.end());
        std::vector<std::string> both;
        for (const std::string& id : pts)
            if (in_block.count(id)) both.push_back(id);
        hyp[key] = std::move(both);
    }

    CrossShiftResult cs = cross_shift(bo.g, fo.m, fo.n_crosses, hyp, tol);
    Element g2 = multiply(multiply(cs.v, bo.g), adjoint(cs.v));
    cert.stages.push_back({"shift", 0.0});
    for_each_point(g2.pres(), [&](int i, int pos) {
        const int before = bandwidth(bo.g.at(i, pos), tol);
        const int after = bandwidth(g2.at(i, pos), tol);
        require(after <= before + 2 && after <= fo.n_crosses, "pipeline.internal",
                kModule, "approximate_invertible",
                "bandwidth may grow by at most two under the shift stage and "
                "stays within the cross count");
    });
    cert.bandwidth_after_shift = max_bandwidth(g2, tol);

    Element w2 = lower_triangularize(g2, fo.n_crosses, cs.o_sets, tol);
    Element t_raw = multiply(g2, w2);
    Element t = chop_element(t_raw, tol.tau_zero);
    cert.stages.push_back({"triangularize", element_norm(subtract(t_raw, t))});
    cert.nilpotent = t;
    cert.nilpotent_residual = nilpotent_residual(t);

    Element h = lift_singular_floor(t, step);
    cert.stages.push_back({"finish", element_norm(subtract(h, t))});

    Element a_prime =
        multiply(multiply(multiply(adjoint(fo.v_left), adjoint(cs.v)), h),
                 multiply(multiply(adjoint(w2), cs.v), adjoint(fo.v_right)));
    cert.a_prime = std::move(a_prime);

    cert.max_unitary_defect = std::max(
        {max_defect(pr.w), max_defect(pr.v), max_defect(fo.big_w),
         max_defect(fo.v_left), max_defect(fo.v_right), max_defect(cs.v),
         max_defect(w2)});
}

/// The pointwise factorization route at the landing level: once every
/// spectrum point unfolds into the marked set, every evaluation of
/// psi(w f' v) is exactly singular, so rotating its singular factorization
/// by one row leaves a strictly lower triangular element.
void route_svd(const Chain& c, int j, const PerturbResult& pr,
               const WideningPlan& plan, const Tolerances& tol, double step,
               PipelineCertificate& cert) {
    cert.route = "svd";
    cert.j_prime = plan.j_land;
    const PresentationPtr ap =
        c.algebras[static_cast<std::size_t>(plan.j_land - 1)];
    const DiagonalMap psi = compose_range(c, j, plan.j_land);

    Element g_raw = multiply(multiply(pr.w, pr.f_prime), pr.v);
    Element g = chop_element(g_raw, tol.tau_zero);
    cert.stages.push_back({"truncate", element_norm(subtract(g_raw, g))});
    Element big_f = apply_map(psi, g);

    FreeValueMap u_free, v_free;
    for_each_point(*ap, [&](int i, int pos) {
        if (ap->is_y_pos(i, pos)) return;
        const Mat& val = big_f.at(i, pos);
        const int n = static_cast<int>(val.rows());
        const Svd s = svd_decompose(val);
        const Mat shift = perm_unitary(Permutation::cycle(n, 1, n));
        const std::string& id = ap->point(i, pos).id;
        u_free[{i, id}] = shift * s.u.adjoint();
        v_free[{i, id}] = s.v;
    });
    Element u_el = derive_element(ap, u_free);
    Element v_el = derive_element(ap, v_free);

    Element t_raw = multiply(multiply(u_el, big_f), v_el);
    Element t = chop_element(t_raw, tol.tau_zero);
    cert.stages.push_back({"triangularize", element_norm(subtract(t_raw, t))});
    require(upper_residual(t) == 0.0, "pipeline.internal", kModule,
            "approximate_invertible",
            "rotated factorization must be strictly lower triangular after "
            "truncation",
            "largest upper residual " + std::to_string(upper_residual(t_raw)));
    cert.nilpotent = t;
    cert.nilpotent_residual = nilpotent_residual(t);

    Element h = lift_singular_floor(t, step);
    cert.stages.push_back({"finish", element_norm(subtract(h, t))});

    Element w_img = apply_map(psi, pr.w);
    Element v_img = apply_map(psi, pr.v);
    Element a_prime = multiply(multiply(adjoint(w_img), multiply(adjoint(u_el), h)),
                               multiply(adjoint(v_el), adjoint(v_img)));
    cert.a_prime = std::move(a_prime);

    cert.max_unitary_defect = std::max({max_defect(pr.w), max_defect(pr.v),
                                        max_defect(u_el), max_defect(v_el)});
}

} // namespace

PipelineCertificate approximate_invertible(const Chain& c, int j,
                                           const Element& a, double eps,
                                           const Tolerances& tol) {
    tol.validate();
    require(eps > 0.0, "pipeline.bad-input", kModule, "approximate_invertible",
            "epsilon must be positive");
    const auto chain_bad = validate_chain(c);
    require(chain_bad.empty(), "pipeline.bad-chain", kModule,
            "approximate_invertible", "chain must validate",
            chain_bad.empty() ? std::string() : chain_bad.front());
    require(j >= 1 && j <= static_cast<int>(c.algebras.size()),
            "pipeline.bad-input", kModule, "approximate_invertible",
            "level index in range");
    require(a.pres_ptr() == c.algebras[static_cast<std::size_t>(j - 1)] ||
                same_presentation(a.pres(), *c.algebras[static_cast<std::size_t>(j - 1)]),
            "pipeline.bad-input", kModule, "approximate_invertible",
            "element must live on the chain's level-j algebra");

    PipelineCertificate cert;
    cert.j = j;
    cert.epsilon = eps;

    if (is_invertible_element(a, tol)) {
        cert.already_invertible = true;
        cert.route = "none";
        cert.j_prime = j;
        cert.a_prime = a;
        cert.total_distance = 0.0;
        cert.floor = min_floor(a);
        return cert;
    }

    const PipelineBudget budget = make_budget(eps);
    const double step = budget.splits[0];

    PerturbResult pr = perturb_noninvertible(a, step, tol);
    cert.u_set = pr.u_set;
    cert.stages.push_back({"perturb", element_norm(subtract(a, pr.f_prime))});

    const WideningPlan plan = plan_far_out(c, j, pr.u_set);
    cert.m = plan.m;
    cert.n_crosses = plan.n_crosses;
    if (plan.j_prime.has_value())
        route_ladder(c, j, a, pr, tol, step, cert);
    else
        route_svd(c, j, pr, plan, tol, step, cert);

    // Final certificate numbers, all recomputed from the raw outputs.
    const DiagonalMap psi = compose_range(c, j, cert.j_prime);
    cert.total_distance =
        element_norm(subtract(apply_map(psi, a), *cert.a_prime));
    require(cert.total_distance <= eps, "pipeline.internal", kModule,
            "approximate_invertible", "recomputed total distance within epsilon",
            std::to_string(cert.total_distance) + " vs " + std::to_string(eps));
    cert.floor = min_floor(*cert.a_prime);
    require(cert.floor > tol.tau_sing, "pipeline.internal", kModule,
            "approximate_invertible",
            "final element must clear the singular floor",
            "floor " + std::to_string(cert.floor));
    for (const StageRecord& st : cert.stages)
        require(st.distance <= step + 1e-12, "pipeline.internal", kModule,
                "approximate_invertible", "each stage within its quarter budget",
                st.stage + ": " + std::to_string(st.distance));
    return cert;
}

} // namespace dsh
