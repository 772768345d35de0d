/* suites.cpp — seeded law batteries shared by lemma-check and acceptance.
 *
 * Design rules observed throughout:
 *   - Draws come only from the mt19937_64 raw output stream (TestRng), never
 *     from std distributions, so the same seed yields the same instances on
 *     every standard library.
 *   - Expected values are recomputed here from first principles (orbit scans,
 *     block-start tables, explicit permutation matrices), not read back from
 *     the code under test.
 *   - Numeric laws aggregate the worst deviation across draws; structural
 *     laws count failures against a bound of zero.  Nothing in a report
 *     depends on wall time or addresses, so serialized reports are
 *     byte-stable.
 */
#include "dsh/suites.hpp"

#include "dsh/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace dsh {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Accumulates one law across draws.
struct LawTally {
    LawResult res;

    LawTally(std::string id, double bound, std::string note = "") {
        res.law = std::move(id);
        res.bound = bound;
        res.note = std::move(note);
    }
    /// Numeric law: keep the worst measurement.
    void value(double m) {
        res.measured = std::max(res.measured, m);
        ++res.draws;
    }
    /// Counting law: accumulate failures.
    void check(bool ok) {
        if (!ok) res.measured += 1.0;
        ++res.draws;
    }
    LawResult close() {
        res.pass = res.measured <= res.bound;
        return res;
    }
    /// For laws where the measurement must strictly exceed the bound.
    LawResult close_above() {
        res.pass = res.measured > res.bound;
        return res;
    }
};

SuiteReport finish(std::string suite, std::uint64_t seed,
                   std::vector<LawResult> laws) {
    SuiteReport rep;
    rep.suite = std::move(suite);
    rep.seed = seed;
    rep.laws = std::move(laws);
    rep.pass = true;
    for (const auto& l : rep.laws) rep.pass = rep.pass && l.pass;
    return rep;
}

template <typename T>
void shuffle_vec(TestRng& r, std::vector<T>& v) {
    for (int q = static_cast<int>(v.size()) - 1; q > 0; --q) {
        const int c = static_cast<int>(r.eng() % static_cast<std::uint64_t>(q + 1));
        std::swap(v[static_cast<std::size_t>(q)], v[static_cast<std::size_t>(c)]);
    }
}

Mat mat_power(Mat base, int e) {
    Mat acc = Mat::Identity(base.rows(), base.cols());
    while (e > 0) {
        if (e & 1) acc = acc * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return acc;
}

/// Composite map A_j -> A_jp along the chain (identity when jp == j).
DiagonalMap compose_range(const Chain& c, int j, int jp) {
    DiagonalMap m = identity_map(c.algebras[static_cast<std::size_t>(j) - 1]);
    for (int t = j; t < jp; ++t)
        m = compose_maps(c.maps[static_cast<std::size_t>(t) - 1], m);
    return m;
}

/// Circle distance from x to the closed arc [a.lo, a.hi]; exact 0 inside.
double arc_distance(const Rat& x, const Arc& a) {
    if (a.contains(x)) return 0.0;
    const double xd = to_double(x);
    auto circ = [](double u, double v) {
        const double d = std::abs(u - v);
        return std::min(d, 1.0 - d);
    };
    return std::min(circ(xd, to_double(a.lo)), circ(xd, to_double(a.hi)));
}

} // namespace

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

Mat random_matrix(TestRng& r, int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = r.box();
    return m;
}

Mat random_unitary(TestRng& r, int n) {
    const Mat a = random_matrix(r, n);
    Eigen::HouseholderQR<Mat> qr(a);
    return Mat(qr.householderQ());
}

PresentationPtr random_presentation(TestRng& r, int max_levels, int max_n) {
    const int L = 1 + r.below(max_levels);
    struct FreeRef {
        int level;
        std::string id;
        int n;
    };
    std::vector<FreeRef> pool;
    std::vector<Level> levels;

    for (int i = 1; i <= L; ++i) {
        Level lv;
        std::vector<int> pattern; // pool indices of the level's decomposition shape

        if (i == 1) {
            lv.n = 2 + r.below(3); // keep the smallest size >= 2
        } else {
            for (int attempt = 0; attempt < 24 && pattern.empty(); ++attempt) {
                const int t = 1 + r.below(std::min<int>(3, static_cast<int>(pool.size())));
                std::vector<int> idx;
                while (static_cast<int>(idx.size()) < t) {
                    const int c = r.below(static_cast<int>(pool.size()));
                    if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
                }
                int sum = 0;
                for (int c : idx) sum += pool[static_cast<std::size_t>(c)].n;
                if (sum <= max_n) pattern = idx;
            }
            if (pattern.empty()) {
                // fall back to the smallest single source
                int best = 0;
                for (int c = 1; c < static_cast<int>(pool.size()); ++c)
                    if (pool[static_cast<std::size_t>(c)].n < pool[static_cast<std::size_t>(best)].n)
                        best = c;
                pattern = {best};
            }
            lv.n = 0;
            for (int c : pattern) lv.n += pool[static_cast<std::size_t>(c)].n;
        }

        const int free_count = 2 + r.below(4);                 // 2..5
        const int y_count = (i == 1) ? 0 : r.below(3);         // 0..2
        const int total = free_count + y_count;
        int k = 0;
        for (int q = 0; q < free_count; ++q, ++k) {
            Point pt;
            pt.id = "x" + std::to_string(i) + "_" + std::to_string(q);
            pt.coord = {(k + 0.5 + 0.4 * r.unit()) / (total + 1)};
            lv.points.push_back(std::move(pt));
        }
        for (int q = 0; q < y_count; ++q, ++k) {
            Point pt;
            pt.id = "y" + std::to_string(i) + "_" + std::to_string(q);
            pt.coord = {(k + 0.5 + 0.4 * r.unit()) / (total + 1)};
            // try an alternative distinct subset with the same sum; otherwise
            // reuse the pattern in a shuffled order
            std::vector<int> chosen;
            for (int attempt = 0; attempt < 8 && chosen.empty(); ++attempt) {
                const int t = 1 + r.below(std::min<int>(3, static_cast<int>(pool.size())));
                std::vector<int> idx;
                while (static_cast<int>(idx.size()) < t) {
                    const int c = r.below(static_cast<int>(pool.size()));
                    if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
                }
                int sum = 0;
                for (int c : idx) sum += pool[static_cast<std::size_t>(c)].n;
                if (sum == lv.n) chosen = idx;
            }
            if (chosen.empty()) {
                chosen = pattern;
                shuffle_vec(r, chosen);
            }
            std::vector<Source> srcs;
            for (int c : chosen)
                srcs.push_back({pool[static_cast<std::size_t>(c)].level,
                                pool[static_cast<std::size_t>(c)].id});
            lv.decomp[pt.id] = std::move(srcs);
            lv.y_ids.push_back(pt.id);
            lv.points.push_back(std::move(pt));
        }

        for (int q = 0; q < free_count; ++q)
            pool.push_back({i, "x" + std::to_string(i) + "_" + std::to_string(q), lv.n});
        levels.push_back(std::move(lv));
    }

    auto p = std::make_shared<const Presentation>(std::move(levels));
    p->require_valid("cli", "random_presentation");
    return p;
}

PresentationPtr random_homogeneous_presentation(TestRng& r) {
    const int L = 2 + r.below(3); // 2..4
    const int n = 2 + r.below(4); // 2..5, shared by every level
    struct FreeRef {
        int level;
        std::string id;
    };
    std::vector<FreeRef> pool;
    std::vector<Level> levels;
    for (int i = 1; i <= L; ++i) {
        Level lv;
        lv.n = n;
        const int free_count = (i == 1) ? 2 + r.below(3) : 1 + r.below(3);
        const int y_count = (i == 1) ? 0 : r.below(3);
        const int total = free_count + y_count;
        int k = 0;
        for (int q = 0; q < free_count; ++q, ++k) {
            Point pt;
            pt.id = "x" + std::to_string(i) + "_" + std::to_string(q);
            pt.coord = {(k + 0.5 + 0.4 * r.unit()) / (total + 1)};
            lv.points.push_back(std::move(pt));
        }
        for (int q = 0; q < y_count; ++q, ++k) {
            Point pt;
            pt.id = "y" + std::to_string(i) + "_" + std::to_string(q);
            pt.coord = {(k + 0.5 + 0.4 * r.unit()) / (total + 1)};
            const auto& src = pool[static_cast<std::size_t>(r.below(static_cast<int>(pool.size())))];
            lv.decomp[pt.id] = {{src.level, src.id}};
            lv.y_ids.push_back(pt.id);
            lv.points.push_back(std::move(pt));
        }
        for (int q = 0; q < free_count; ++q)
            pool.push_back({i, "x" + std::to_string(i) + "_" + std::to_string(q)});
        levels.push_back(std::move(lv));
    }
    auto p = std::make_shared<const Presentation>(std::move(levels));
    p->require_valid("cli", "random_homogeneous_presentation");
    return p;
}

Element random_element(TestRng& r, PresentationPtr p) {
    return derive_element(p, [&](int i, const Point&) { return random_matrix(r, p->size_at(i)); });
}

Chain synthetic_ladder_chain() {
    auto pt = [](std::string id, double c) { return Point{std::move(id), {c}}; };

    Level l1;
    l1.n = 2;
    l1.points = {pt("a0", 0.0), pt("a1", 0.1), pt("a2", 0.2), pt("a3", 0.3)};
    auto p1 = std::make_shared<const Presentation>(std::vector<Level>{l1});

    Level l2;
    l2.n = 4;
    l2.points = {pt("b0", 0.0), pt("b1", 0.1), pt("b2", 0.2), pt("b3", 0.3)};
    auto p2 = std::make_shared<const Presentation>(std::vector<Level>{l2});

    Level l3a;
    l3a.n = 92;
    l3a.points = {pt("c0", 0.0), pt("c1", 0.1), pt("c2", 0.2)};
    Level l3b;
    l3b.n = 184;
    l3b.points = {pt("d0", 0.0), pt("d1", 0.2), pt("y1", 0.4)};
    l3b.y_ids = {"y1"};
    l3b.decomp["y1"] = {{1, "c0"}, {1, "c1"}};
    auto p3 = std::make_shared<const Presentation>(std::vector<Level>{l3a, l3b});

    // first map: every middle point's word starts at a0, so the marked set
    // {a0} pulls back to every spectrum point one level up
    DiagonalMap m12;
    m12.source = p1;
    m12.target = p2;
    m12.table = {{
        {{1, "a0"}, {1, "a1"}},
        {{1, "a0"}, {1, "a2"}},
        {{1, "a0"}, {1, "a3"}},
        {{1, "a0"}, {1, "a1"}},
    }};

    auto word = [](int entries, int offset) {
        std::vector<Source> w;
        for (int t = 0; t < entries; ++t)
            w.push_back({1, "b" + std::to_string((t + offset) % 4)});
        return w;
    };
    auto concat = [](std::vector<Source> a, const std::vector<Source>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    DiagonalMap m23;
    m23.source = p2;
    m23.target = p3;
    m23.table = {
        {word(23, 0), word(23, 1), word(23, 2)},
        {word(46, 0), word(46, 3), concat(word(23, 0), word(23, 1))},
    };

    Chain c;
    c.algebras = {p1, p2, p3};
    c.maps = {std::move(m12), std::move(m23)};
    const auto bad = validate_chain(c);
    require(bad.empty(), "suites.internal", "cli", "synthetic_ladder_chain",
            "hand-built chain valid", bad.empty() ? "" : bad.front());
    return c;
}

RotationSystem fibonacci_system() {
    RotationSystem sys;
    sys.alpha = Rat(377, 610);
    sys.arcs = {Arc{Rat(0), Rat(1, 8)}, Arc{Rat(0), Rat(1, 32)}, Arc{Rat(0), Rat(1, 128)}};
    return sys;
}

Element seeded_noninvertible(const RotationSystem& sys, int s_index,
                             PresentationPtr p, std::uint64_t seed) {
    TestRng r(seed);
    const auto part = return_partition(sys, s_index);
    require(part.levels.size() >= 2, "suites.bad-input", "cli", "seeded_noninvertible",
            "at least two return classes");

    // choose the piece(s) whose forward image the function vanishes on
    std::vector<int> chosen;
    switch (static_cast<int>(seed % 3)) {
        case 0: chosen = {0}; break;
        case 1: chosen = {1}; break;
        default: chosen = {0, 1}; break;
    }
    std::vector<Arc> r_arcs;
    for (int c : chosen)
        for (const auto& iv : part.levels[static_cast<std::size_t>(c)].intervals) {
            const Rat lo = mod1(iv.lo + sys.alpha);
            const Rat hi = mod1(iv.hi + sys.alpha);
            require(lo <= hi, "suites.internal", "cli", "seeded_noninvertible",
                    "forward image does not wrap");
            r_arcs.push_back(Arc{lo, hi});
        }

    // trig polynomial q, kept away from zero on average by the constant term
    std::vector<Cplx> coef(7);
    for (auto& c : coef) c = 0.35 * r.box();
    coef[3] += Cplx(1.1, 0.0);

    const Arc s_arc = sys.arcs[static_cast<std::size_t>(s_index)];
    Generator gen;
    gen.kind = Generator::Kind::Shifted;
    gen.sample = [coef, s_arc, r_arcs](const Rat& x) -> Cplx {
        if (s_arc.contains(x)) return {0.0, 0.0};
        double dr = 1e9;
        for (const auto& a : r_arcs) dr = std::min(dr, arc_distance(x, a));
        if (dr == 0.0) return {0.0, 0.0};
        const double ds = arc_distance(x, s_arc);
        const double th = kTwoPi * to_double(x);
        Cplx q(0.0, 0.0);
        for (int k = -3; k <= 3; ++k)
            q += coef[static_cast<std::size_t>(k + 3)] *
                 Cplx(std::cos(k * th), std::sin(k * th));
        return q * ds * dr;
    };
    return generator_image(sys, s_index, p, gen);
}

// ---------------------------------------------------------------------------
// suite 1: unitary-path identities
// ---------------------------------------------------------------------------

SuiteReport run_path_suite(std::uint64_t seed, int draws, const Tolerances& tol) {
    tol.validate();
    TestRng r(seed);
    LawTally reindex("path.window-reindex", 1e-10,
                     "conjugating by the window swap relocates the far column");
    LawTally split("path.prefix-split", 1e-10,
                   "a chain of window moves factors through the swap at the cut");
    LawTally blocks("path.window-blocks", 1e-10,
                    "the shift family splits into a direct sum at restart positions");
    LawTally unit("path.unitary", 1e-10, "every sampled path value is unitary");

    for (int d = 0; d < draws; ++d) {
        // law 1: u^n_{k,n}(xi) = S * u^n_{k,i}(xi) * S with S the (i,n) window swap
        {
            const int N = 1 + r.below(4);
            const int n = 3 * N + r.below(24 - 3 * N + 1);
            const int k = N + r.below(n - 3 * N + 1);
            const int i = k + N + r.below(n - N - (k + N) + 1);
            const double xi = r.unit();
            const PathParams pp{n, N};
            const Mat lhs = block_transposition(k, n, xi, pp);
            const Mat s = perm_unitary(block_transposition_permutation(i, n, pp));
            const Mat rhs = s * block_transposition(k, i, xi, pp) * s;
            reindex.value(max_abs(lhs - rhs));
            unit.value(unitary_defect(lhs));
        }
        // law 2: a prefix of window moves commutes past the cut swap
        {
            const int N = 1 + r.below(4);
            const int n = (2 * N + 1) + r.below(24 - 2 * N);
            const int t = (N + 1) + r.below(n - 2 * N);
            const PathParams pp{n, N};
            std::vector<double> xi(static_cast<std::size_t>(n), 0.0);
            for (int q = N + 1; q <= t - N; ++q) xi[static_cast<std::size_t>(q) - 1] = r.unit();

            Mat prod = Mat::Identity(n, n);
            for (int k = N; k <= t - 2; ++k)
                prod = prod * block_transposition(k, n, xi[static_cast<std::size_t>(k)], pp);
            const Mat lhs = perm_unitary(Permutation::cycle(n, 1, n).power(N)) * prod *
                            perm_unitary(block_transposition_permutation(t - 1, n, pp));

            Mat prod2 = Mat::Identity(n, n);
            for (int k = N; k <= t - 2; ++k)
                prod2 = prod2 * block_transposition(k, t - 1, xi[static_cast<std::size_t>(k)], pp);
            const Mat rhs = perm_unitary(Permutation::cycle(n, 1, t - 1).power(N)) * prod2 *
                            perm_unitary(Permutation::cycle(n, t, n).power(N));
            split.value(max_abs(lhs - rhs));
            unit.value(unitary_defect(lhs));
        }
        // law 3: restart positions cut the shift family into a direct sum
        {
            const int N = 1 + r.below(4);
            const int n = (N + 1) + r.below(24 - N);
            const PathParams pp{n, N};
            std::vector<double> xi(static_cast<std::size_t>(n), 0.0);
            xi[0] = 1.0;
            std::vector<int> ones = {1};
            int last = 1;
            while (true) {
                const int next = last + N + r.below(3);
                if (next > n - N) break;
                const bool is_one = r.below(2) == 0;
                xi[static_cast<std::size_t>(next) - 1] = is_one ? 1.0 : 0.05 + 0.9 * r.unit();
                if (is_one) ones.push_back(next);
                last = next;
            }
            std::vector<int> cuts = {1};
            for (std::size_t q = 1; q < ones.size(); ++q)
                if (r.below(2) == 0) cuts.push_back(ones[q]);
            cuts.push_back(n + 1);

            const Mat lhs = lt_family(xi, pp);
            std::vector<Mat> parts;
            for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
                const int a = cuts[q], b = cuts[q + 1];
                std::vector<double> sub(xi.begin() + (a - 1), xi.begin() + (b - 1));
                parts.push_back(lt_family(sub, PathParams{b - a, N}));
            }
            blocks.value(max_abs(lhs - direct_sum(parts)));
            unit.value(unitary_defect(lhs));
        }
    }
    return finish("paths", seed,
                  {reindex.close(), split.close(), blocks.close(), unit.close()});
}

// ---------------------------------------------------------------------------
// suite 2: cross preservation and bandwidth growth
// ---------------------------------------------------------------------------

SuiteReport run_cross_suite(std::uint64_t seed, int draws, const Tolerances& tol) {
    tol.validate();
    TestRng r(seed);
    auto grid = [](int g) { return static_cast<double>(g) / 32.0; };

    LawTally single("cross.untouched-single", 0.0,
                    "a two-index path away from a cross never disturbs it");
    LawTally window("cross.untouched-window", 0.0,
                    "a fan of paths inside a window spares crosses outside it");
    LawTally collect("cross.window-collect", 0.0,
                     "a fan with one full swap pulls a cross to the window start");
    LawTally cyc_exact("cross.cycle-exact", 0.0,
                       "full cycle paths keep bandwidth (+1 when started inside)");
    LawTally cyc_band("cross.cycle-band", 0.0,
                      "partial cycle paths grow bandwidth by at most 2");
    LawTally mv_origin("cross.mover-origin", 1e-12, "the mover starts at the identity");
    LawTally mv_end("cross.mover-endpoint", 1e-10,
                    "the mover ends at its permutation unitary");
    LawTally mv_collect("cross.mover-collect", 0.0,
                        "the full mover relocates crosses to the leading indices");
    LawTally mv_band("cross.mover-band", 0.0,
                     "the mover grows bandwidth by at most 2 along the whole path");
    LawTally mv_rows("cross.mover-rows", tol.tau_zero,
                     "rows vanishing at the listed indices move to the top");
    LawTally mv_cols("cross.mover-columns", tol.tau_zero,
                     "columns vanishing at the listed indices move to the front");

    for (int d = 0; d < draws; ++d) {
        const int n = 6 + r.below(15); // 6..20
        const int bw = 2 + r.below(n - 2);
        Mat D = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (std::abs(i - j) < bw) D(i, j) = r.box();
        std::set<int> zset;
        zset.insert(2 + r.below(n - 1)); // guarantee one index >= 2
        const int extra = r.below(3);
        while (static_cast<int>(zset.size()) < 1 + extra) zset.insert(1 + r.below(n));
        for (int z : zset) {
            D.row(z - 1).setZero();
            D.col(z - 1).setZero();
        }
        const std::vector<int> z_list(zset.begin(), zset.end());
        const int m = static_cast<int>(z_list.size());
        const int r0 = bandwidth(D, tol);

        // untouched cross, single factor, full parameter grid
        {
            const int l = z_list[static_cast<std::size_t>(r.below(m))];
            int l1 = 1 + r.below(n);
            while (l1 == l) l1 = 1 + r.below(n);
            int l2 = 1 + r.below(n);
            while (l2 == l || l2 == l1) l2 = 1 + r.below(n);
            if (l1 > l2) std::swap(l1, l2);
            for (int g = 0; g <= 32; ++g) {
                const Mat u = path_u(l1, l2, grid(g), n);
                single.check(has_zero_cross(u * D * u.adjoint(), l, tol));
            }
        }
        // untouched cross, window fan avoiding the cross
        {
            const int pivot = z_list[static_cast<std::size_t>(r.below(m))];
            const int maxw = std::max(2, std::min(4, n / 2 - 1));
            const int mw = 2 + r.below(maxw - 1);
            const int starts = n - mw + 1;
            int l = 0;
            const int start0 = r.below(starts);
            for (int off = 0; off < starts; ++off) {
                const int cand = 1 + (start0 + off) % starts;
                if (pivot < cand || pivot > cand + mw - 1) {
                    l = cand;
                    break;
                }
            }
            Mat u = Mat::Identity(n, n);
            for (int t = 1; t <= mw - 1; ++t)
                u = u * path_u(l, l + t, grid(r.below(33)), n);
            window.check(has_zero_cross(u * D * u.adjoint(), pivot, tol));
        }
        // collecting a cross at the window start via one full swap
        {
            const int mw = 2 + r.below(std::max(1, std::min(4, n - 1) - 1));
            const int l = 1 + r.below(n - mw + 1);
            Mat dc = D;
            std::vector<double> xiw(static_cast<std::size_t>(n) + 1, 0.0);
            const int sstar = l + 1 + r.below(mw - 1);
            for (int pos = l + 1; pos <= l + mw - 1; ++pos) {
                const bool on = (pos == sstar) || (r.below(2) == 0);
                if (!on) continue;
                xiw[static_cast<std::size_t>(pos)] =
                    (pos == sstar) ? 1.0 : static_cast<double>(1 + r.below(32)) / 32.0;
                dc.row(pos - 1).setZero();
                dc.col(pos - 1).setZero();
            }
            Mat u = Mat::Identity(n, n);
            for (int t = 1; t <= mw - 1; ++t)
                u = u * path_u(l, l + t, xiw[static_cast<std::size_t>(l + t)], n);
            collect.check(has_zero_cross(u * dc * u.adjoint(), l, tol));
        }
        // cycle paths against a crossed index
        {
            int j = 0;
            for (int z : z_list)
                if (z >= 2) {
                    j = z;
                    break;
                }
            const Mat w1 = path_w(1, j, 1.0, n);
            cyc_exact.check(bandwidth(w1 * D * w1.adjoint(), tol) <= r0);
            const int i2 = 2 + r.below(j - 1);
            const Mat wi = path_w(i2, j, 1.0, n);
            cyc_exact.check(bandwidth(wi * D * wi.adjoint(), tol) <= r0 + 1);
            const int ig = 1 + r.below(j);
            for (int g = 0; g <= 32; ++g) {
                const Mat wg = path_w(ig, j, grid(g), n);
                cyc_band.check(bandwidth(wg * D * wg.adjoint(), tol) <= r0 + 2);
            }
        }
        // the cross mover along its whole parameter range
        {
            mv_origin.value(max_abs(cross_mover(z_list, 0.0, n) - Mat::Identity(n, n)));
            const Mat w1 = cross_mover(z_list, 1.0, n);
            mv_end.value(max_abs(w1 - perm_unitary(cross_mover_permutation(z_list, n))));
            const Mat c1 = w1 * D * w1.adjoint();
            for (int q = 1; q <= m; ++q) mv_collect.check(has_zero_cross(c1, q, tol));

            const int bcols = 1 + r.below(5);
            Mat tr(n, bcols);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < bcols; ++j) tr(i, j) = r.box();
            for (int z : z_list) tr.row(z - 1).setZero();
            Mat tc(bcols, n);
            for (int i = 0; i < bcols; ++i)
                for (int j = 0; j < n; ++j) tc(i, j) = r.box();
            for (int z : z_list) tc.col(z - 1).setZero();

            auto embed_rows = [&](const Mat& x) {
                Mat e = Mat::Zero(n + bcols, n + bcols);
                e.block(0, n, n, bcols) = x;
                return e;
            };
            // The column-mixed corner of a banded matrix is its lower-left
            // block, so the embedding must place tc there: pushing unlisted
            // columns deeper then shrinks the band distance n + i - j.
            auto embed_cols = [&](const Mat& x) {
                Mat e = Mat::Zero(bcols + n, bcols + n);
                e.block(n, 0, bcols, n) = x;
                return e;
            };
            const int er0 = bandwidth(embed_rows(tr), tol);
            const int ec0 = bandwidth(embed_cols(tc), tol);

            const Mat wt = w1 * tr;
            double rows_max = 0.0;
            for (int q = 0; q < m; ++q) rows_max = std::max(rows_max, wt.row(q).cwiseAbs().maxCoeff());
            mv_rows.value(rows_max);
            const Mat tw = tc * w1.adjoint();
            double cols_max = 0.0;
            for (int q = 0; q < m; ++q) cols_max = std::max(cols_max, tw.col(q).cwiseAbs().maxCoeff());
            mv_cols.value(cols_max);

            for (int g = 0; g <= 32; ++g) {
                const Mat wg = cross_mover(z_list, grid(g), n);
                mv_band.check(bandwidth(wg * D * wg.adjoint(), tol) <= r0 + 2);
                mv_rows.value(
                    static_cast<double>(bandwidth(embed_rows(wg * tr), tol) > er0));
                mv_cols.value(
                    static_cast<double>(bandwidth(embed_cols(tc * wg.adjoint()), tol) > ec0));
            }
        }
    }
    return finish("crosses", seed,
                  {single.close(), window.close(), collect.close(), cyc_exact.close(),
                   cyc_band.close(), mv_origin.close(), mv_end.close(), mv_collect.close(),
                   mv_band.close(), mv_rows.close(), mv_cols.close()});
}

// ---------------------------------------------------------------------------
// suite 3: marker elements
// ---------------------------------------------------------------------------

SuiteReport run_indicator_suite(std::uint64_t seed, int count, const Tolerances& tol) {
    tol.validate();
    TestRng r(seed);
    LawTally spec_ok("indicator.spec-valid", 0.0, "drawn specs pass validation");
    LawTally start_sets("indicator.start-sets", 0.0,
                        "block-start sets match per-point start indices");
    LawTally shape("indicator.window-shape", tol.tau_zero,
                   "diagonal, real entries in [0,1], final gap-width entries zero");
    LawTally spacing("indicator.window-spacing", 0.0,
                     "at most one nonzero entry per gap-width window");
    LawTally marks("indicator.start-marks", 0.0,
                   "entry j marks exactly the offsets of block starts");
    LawTally vanish("indicator.forbidden-vanish", 0.0,
                    "entries vanish on the forbidden sets");
    LawTally windows("indicator.start-windows", 0.0,
                     "certificates cover the start sets with exact ones");

    for (int d = 0; d < count; ++d) {
        auto p = random_presentation(r, 4, 12);
        const int smin = p->min_size();
        const int M = 1 + r.below(std::min(3, smin - 1));
        const int limit = smin - M; // offsets stay strictly below this
        std::vector<int> K;
        K.push_back(r.below(std::min(2, limit)));
        while (r.below(2) == 0) {
            const int nxt = K.back() + M + r.below(2);
            if (nxt >= limit) break;
            K.push_back(nxt);
        }

        // start-index table straight from the presentation's block starts
        std::vector<std::map<int, std::set<std::string>>> starts(
            static_cast<std::size_t>(p->num_levels()) + 1);
        for (int i = 1; i <= p->num_levels(); ++i)
            for (const auto& point : p->level(i).points)
                for (int st : p->block_starts(i, point.id))
                    starts[static_cast<std::size_t>(i)][st].insert(point.id);

        IndicatorSpec spec;
        spec.M = M;
        spec.K = K;
        for (int tries = 0; tries < 3; ++tries) {
            const int i = 1 + r.below(p->num_levels());
            const int j = 1 + r.below(p->size_at(i));
            std::vector<std::string> allowed;
            for (const auto& point : p->level(i).points) {
                bool marked = false;
                for (int kt : K) {
                    const auto& row = starts[static_cast<std::size_t>(i)];
                    const auto it = row.find(j - kt);
                    if (it != row.end() && it->second.count(point.id)) marked = true;
                }
                if (!marked) allowed.push_back(point.id);
            }
            if (allowed.empty()) continue;
            shuffle_vec(r, allowed);
            allowed.resize(std::min<std::size_t>(allowed.size(), 2));
            std::sort(allowed.begin(), allowed.end());
            spec.F[{i, j}] = allowed;
        }
        spec_ok.check(validate_indicator_spec(*p, spec).empty());

        const Element phi = build_phi(p, spec);
        const auto th = build_theta(p, spec);

        for (int i = 1; i <= p->num_levels(); ++i) {
            const int ni = p->size_at(i);
            // cross-check the start-set helper against the table
            for (int k = 1; k <= ni; ++k) {
                const auto bik = compute_bik(*p, i, k);
                std::set<std::string> lhs(bik.begin(), bik.end());
                const auto& row = starts[static_cast<std::size_t>(i)];
                const auto it = row.find(k);
                const std::set<std::string> rhs =
                    it == row.end() ? std::set<std::string>{} : it->second;
                start_sets.check(lhs == rhs);
            }
            for (int pos = 0; pos < static_cast<int>(p->level(i).points.size()); ++pos) {
                const auto& id = p->level(i).points[static_cast<std::size_t>(pos)].id;
                for (const Element* el : {&phi, &th.theta}) {
                    const Mat& v = el->at(i, pos);
                    double worst = 0.0;
                    for (int a = 0; a < ni; ++a)
                        for (int b = 0; b < ni; ++b)
                            if (a != b) worst = std::max(worst, std::abs(v(a, b)));
                    for (int a = 0; a < ni; ++a) {
                        const Cplx e = v(a, a);
                        worst = std::max(worst, std::abs(e.imag()));
                        worst = std::max(worst, std::max(0.0, -e.real()));
                        worst = std::max(worst, std::max(0.0, e.real() - 1.0));
                        if (a >= ni - M) worst = std::max(worst, std::abs(e));
                    }
                    shape.value(worst);
                    int prev = -M - 1;
                    bool spaced = true;
                    for (int a = 0; a < ni; ++a) {
                        if (std::abs(v(a, a)) == 0.0) continue;
                        if (a - prev < M) spaced = false;
                        prev = a;
                    }
                    spacing.check(spaced);
                }
                // the iff: phi marks j exactly when some offset hits a block start
                const Mat& v = phi.at(i, pos);
                for (int j = 1; j <= ni; ++j) {
                    bool expected = false;
                    for (int kt : K) {
                        const auto& row = starts[static_cast<std::size_t>(i)];
                        const auto it = row.find(j - kt);
                        if (it != row.end() && it->second.count(id)) expected = true;
                    }
                    const Cplx e = v(j - 1, j - 1);
                    marks.check(e == Cplx(expected ? 1.0 : 0.0, 0.0));
                }
            }
        }
        // forbidden sets force exact zeros
        for (const auto& [key, ids] : spec.F) {
            const auto [i, j] = key;
            for (const auto& id : ids)
                vanish.check(th.theta.value(i, id)(j - 1, j - 1) == Cplx(0.0, 0.0));
        }
        // certificates: cover the start sets and carry exact ones at every offset
        for (int i = 1; i <= p->num_levels(); ++i)
            for (int k = 1; k <= p->size_at(i); ++k) {
                const auto bik = compute_bik(*p, i, k);
                if (bik.empty()) continue;
                const auto it = th.certificates.find({i, k});
                if (it == th.certificates.end()) {
                    windows.check(false);
                    continue;
                }
                const std::set<std::string> cover(it->second.begin(), it->second.end());
                for (const auto& id : bik) windows.check(cover.count(id) == 1);
                for (const auto& id : it->second)
                    for (int kt : K)
                        windows.check(th.theta.value(i, id)(k + kt - 1, k + kt - 1) ==
                                      Cplx(1.0, 0.0));
            }
    }
    return finish("indicators", seed,
                  {spec_ok.close(), start_sets.close(), shape.close(), spacing.close(),
                   marks.close(), vanish.close(), windows.close()});
}

// ---------------------------------------------------------------------------
// suite 4: quotients and the homogeneous collapse
// ---------------------------------------------------------------------------

SuiteReport run_quotient_suite(std::uint64_t seed, int count, const Tolerances& tol) {
    tol.validate();
    TestRng r(seed);
    LawTally valid("quotient.valid", 0.0, "quotient presentations validate");
    LawTally rdev("quotient.restrict-deviation", tol.tau_zero,
                  "restricted elements keep zero block deviation");
    LawTally rval("quotient.restrict-values", tol.tau_zero,
                  "restriction copies the retained evaluations");
    LawTally cnorm("quotient.collapse-norm", tol.tau_eq,
                   "collapse transport preserves the element norm");
    LawTally cmul("quotient.collapse-multiplicative", tol.tau_eq,
                  "collapse transport is multiplicative");
    LawTally crt("quotient.collapse-roundtrip", tol.tau_zero,
                 "lift after transport returns the element");

    for (int d = 0; d < count; ++d) {
        auto p = random_presentation(r, 4, 12);
        // retained set: the first free point of every level always stays, the
        // rest keep with probability 1/2; a chosen glued point brings along
        // its sources so the set stays saturated
        std::vector<std::pair<int, std::string>> s;
        std::set<std::pair<int, std::string>> sset;
        auto keep = [&](int i, const std::string& id) {
            if (sset.insert({i, id}).second) s.push_back({i, id});
        };
        for (int i = 1; i <= p->num_levels(); ++i) {
            bool first_free = true;
            for (const auto& point : p->level(i).points) {
                if (p->is_y(i, point.id)) {
                    if (r.below(4) == 0) {
                        for (const auto& src : p->sources(i, point.id)) keep(src.level, src.point);
                        keep(i, point.id);
                    }
                    continue;
                }
                if (first_free || r.below(2) == 0) keep(i, point.id);
                first_free = false;
            }
        }
        const auto q = quotient_presentation(*p, s);
        valid.check(q.quotient->validate().empty());

        for (int e = 0; e < 5; ++e) {
            const Element f = random_element(r, p);
            const Element rf = restrict_element(q.gamma, f);
            rdev.value(element_deviation(rf));
            double worst = 0.0;
            for (int i = 1; i <= p->num_levels(); ++i) {
                const int ti = q.gamma.level_map[static_cast<std::size_t>(i) - 1];
                if (ti == 0) continue;
                const auto& kept = q.gamma.kept[static_cast<std::size_t>(i) - 1];
                for (int qpos = 0; qpos < static_cast<int>(kept.size()); ++qpos)
                    worst = std::max(
                        worst, max_abs(rf.at(ti, qpos) -
                                       f.at(i, kept[static_cast<std::size_t>(qpos)])));
            }
            rval.value(worst);
        }
    }

    for (int d = 0; d < count; ++d) {
        auto hp = random_homogeneous_presentation(r);
        const auto space = collapse_homogeneous(*hp);
        std::vector<Element> fs;
        for (int e = 0; e < 5; ++e) fs.push_back(random_element(r, hp));
        for (int e = 0; e < 5; ++e) {
            const Element& f = fs[static_cast<std::size_t>(e)];
            const auto tf = collapse_transport(space, f);
            double tn = 0.0;
            for (const auto& mval : tf) tn = std::max(tn, op_norm(mval));
            cnorm.value(std::abs(tn - element_norm(f)));

            const Element& g = fs[static_cast<std::size_t>((e + 1) % 5)];
            const auto tg = collapse_transport(space, g);
            const auto tfg = collapse_transport(space, f * g);
            double worst = 0.0;
            for (std::size_t c = 0; c < tfg.size(); ++c)
                worst = std::max(worst, max_abs(tfg[c] - tf[c] * tg[c]));
            cmul.value(worst);

            const Element lifted = collapse_lift(hp, space, tf);
            double rt = 0.0;
            for (int i = 1; i <= hp->num_levels(); ++i)
                for (int pos = 0; pos < static_cast<int>(hp->level(i).points.size()); ++pos)
                    rt = std::max(rt, max_abs(lifted.at(i, pos) - f.at(i, pos)));
            crt.value(rt);
        }
    }
    return finish("quotients", seed,
                  {valid.close(), rdev.close(), rval.close(), cnorm.close(), cmul.close(),
                   crt.close()});
}

// ---------------------------------------------------------------------------
// suite 5: the rotation system
// ---------------------------------------------------------------------------

SuiteReport run_dynamics_suite(const Tolerances& tol) {
    tol.validate();
    const RotationSystem sys = fibonacci_system();
    LawTally structure("dynamics.structure", 0.0, "system, chain, and maps validate");
    LawTally classes("dynamics.return-classes", 0.0,
                     "at most three return times, matching a direct orbit scan");
    LawTally tiling("dynamics.tiling", 0.0,
                    "sum of time times total class length is exactly one");
    LawTally dev("dynamics.zero-deviation", tol.tau_zero,
                 "generator images satisfy the gluing exactly");
    LawTally comp("dynamics.inclusion-compose", 0.0,
                  "composed inclusions equal the direct inclusion table");
    LawTally trans("dynamics.inclusion-transport", tol.tau_zero,
                   "inclusion maps carry generator images to generator images");

    structure.check(validate_system(sys).empty());
    const auto part = return_partition(sys, 0);
    classes.check(static_cast<int>(part.levels.size()) <= 3);

    // direct orbit scan, built from raw rotation arithmetic only
    const Arc& s_arc = sys.arcs[0];
    auto brute = [&](const Rat& x) {
        Rat y = x;
        for (int k = 1; k <= 700; ++k) {
            y = mod1(y + sys.alpha);
            if (s_arc.contains(y)) return k;
        }
        return -1;
    };

    Rat mass(0);
    std::set<int> times;
    for (const auto& lvl : part.levels) {
        times.insert(lvl.n);
        std::set<Rat> ys(lvl.y_points.begin(), lvl.y_points.end());
        for (const auto& iv : lvl.intervals) {
            mass += Rat(lvl.n) * (iv.hi - iv.lo);
            const Rat mid = (iv.lo + iv.hi) / 2;
            const Rat third = (iv.lo * 2 + iv.hi) / 3;
            for (const Rat& x : {iv.lo, iv.hi, mid, third}) {
                const int bt = brute(x);
                if (ys.count(x))
                    classes.check(bt != lvl.n && bt > 0);
                else
                    classes.check(bt == lvl.n);
            }
        }
    }
    tiling.check(mass == Rat(1));

    // fine scan of the arc: every sampled point's direct return time appears
    // among the classes whose closed pieces contain it
    std::set<int> seen;
    for (int j = 0; j <= 610; ++j) {
        const Rat x(j, 4880);
        if (!s_arc.contains(x)) continue;
        const int bt = brute(x);
        seen.insert(bt);
        bool matched = false;
        for (const auto& lvl : part.levels)
            for (const auto& iv : lvl.intervals)
                if (iv.contains(x) && lvl.n == bt) matched = true;
        classes.check(matched);
    }
    std::set<int> declared;
    for (const auto& lvl : part.levels) declared.insert(lvl.n);
    classes.check(seen == declared && times == declared);

    // generators: a plain exponential and a bump vanishing on the arc exactly
    Generator exp_gen;
    exp_gen.kind = Generator::Kind::Function;
    exp_gen.sample = [](const Rat& x) {
        const double th = kTwoPi * to_double(x);
        return Cplx(std::cos(th), std::sin(th));
    };
    Generator bump_gen;
    bump_gen.kind = Generator::Kind::Shifted;
    bump_gen.sample = [s_arc](const Rat& x) -> Cplx {
        if (s_arc.contains(x)) return {0.0, 0.0};
        const double ds = arc_distance(x, s_arc);
        const double th = kTwoPi * to_double(x);
        return {ds * (1.0 + 0.5 * std::cos(th)), 0.3 * ds};
    };

    const Chain chain = build_chain(sys, 6);
    structure.check(validate_chain(chain).empty());

    for (std::size_t a = 0; a < chain.algebras.size(); ++a) {
        const Element img_f =
            generator_image(sys, static_cast<int>(a), chain.algebras[a], exp_gen);
        const Element img_g =
            generator_image(sys, static_cast<int>(a), chain.algebras[a], bump_gen);
        dev.value(element_deviation(img_f));
        dev.value(element_deviation(img_g));
        if (a + 1 < chain.algebras.size()) {
            const Element nf = generator_image(sys, static_cast<int>(a) + 1,
                                               chain.algebras[a + 1], exp_gen);
            const Element ng = generator_image(sys, static_cast<int>(a) + 1,
                                               chain.algebras[a + 1], bump_gen);
            trans.value(element_norm(apply_map(chain.maps[a], img_f) - nf));
            trans.value(element_norm(apply_map(chain.maps[a], img_g) - ng));
        }
    }

    // the direct outermost-to-innermost inclusion equals the composition
    const DiagonalMap direct =
        build_inclusion(sys, 0, 2, chain.algebras[0], chain.algebras[2]);
    const DiagonalMap composed = compose_maps(chain.maps[1], chain.maps[0]);
    comp.check(validate_map(direct).empty());
    bool tables_equal = direct.table.size() == composed.table.size();
    for (std::size_t i = 0; tables_equal && i < direct.table.size(); ++i) {
        tables_equal = direct.table[i].size() == composed.table[i].size();
        for (std::size_t pos = 0; tables_equal && pos < direct.table[i].size(); ++pos) {
            const auto& dw = direct.table[i][pos];
            const auto& cw = composed.table[i][pos];
            tables_equal = dw.size() == cw.size();
            for (std::size_t t = 0; tables_equal && t < dw.size(); ++t)
                tables_equal = dw[t].level == cw[t].level && dw[t].point == cw[t].point;
        }
    }
    comp.check(tables_equal);

    return finish("dynamics", 0,
                  {structure.close(), classes.close(), tiling.close(), dev.close(),
                   comp.close(), trans.close()});
}

// ---------------------------------------------------------------------------
// suite 6: the approximation pipeline end to end
// ---------------------------------------------------------------------------

SuiteReport run_pipeline_suite(std::uint64_t seed, int inputs, const Tolerances& tol) {
    tol.validate();
    const RotationSystem sys = fibonacci_system();
    const Chain chain = injectivize_chain(build_chain(sys, 6));

    LawTally total("pipeline.total-distance", 0.0,
                   "recomputed distance from the pushed input stays within budget");
    LawTally stages("pipeline.stage-budgets", 1e-12,
                    "every stage distance stays within a quarter of the budget");
    LawTally floor_law("pipeline.floor", tol.tau_sing,
                       "the output's smallest singular value clears the threshold");
    LawTally nil("pipeline.nilpotent", 1e-9,
                 "the triangular stage output powers to zero at the matrix size");
    LawTally udef("pipeline.unitary-defect", 1e-10,
                  "all conjugators stay unitary along the run");
    LawTally agree("pipeline.certificate-agreement", tol.tau_zero,
                   "certificate distance equals the independent recomputation");

    double min_floor = 1e300;
    for (int s = 0; s < inputs; ++s) {
        const Element a =
            seeded_noninvertible(sys, 0, chain.algebras[0], seed + static_cast<std::uint64_t>(s));
        for (const double eps : {0.5, 0.1}) {
            const auto cert = approximate_invertible(chain, 1, a, eps, tol);

            const DiagonalMap psi = compose_range(chain, 1, cert.j_prime);
            const Element image = apply_map(psi, a);
            const double recomputed = element_norm(image - *cert.a_prime);
            total.check(recomputed <= eps);
            agree.value(std::abs(recomputed - cert.total_distance));

            for (const auto& st : cert.stages)
                stages.value(std::max(0.0, st.distance - eps / 4.0));

            const auto& ap = *cert.a_prime;
            for (int i = 1; i <= ap.pres().num_levels(); ++i)
                for (int pos = 0; pos < static_cast<int>(ap.pres().level(i).points.size()); ++pos)
                    min_floor = std::min(min_floor, singular_floor(ap.at(i, pos)));

            const auto& t = *cert.nilpotent;
            double nres = 0.0;
            for (int i = 1; i <= t.pres().num_levels(); ++i) {
                const int ni = t.pres().size_at(i);
                for (int pos = 0; pos < static_cast<int>(t.pres().level(i).points.size()); ++pos)
                    nres = std::max(nres, op_norm(mat_power(t.at(i, pos), ni)));
            }
            nil.value(nres);
            udef.value(cert.max_unitary_defect);
        }
    }
    floor_law.value(min_floor);

    return finish("pipeline", seed,
                  {total.close(), stages.close(), floor_law.close_above(), nil.close(),
                   udef.close(), agree.close()});
}

// ---------------------------------------------------------------------------
// bundle and serialization
// ---------------------------------------------------------------------------

std::vector<SuiteReport> run_all_suites(std::uint64_t seed, const Tolerances& tol) {
    std::vector<SuiteReport> reports;
    reports.push_back(run_path_suite(seed, 200, tol));
    reports.push_back(run_cross_suite(seed + 1, 500, tol));
    reports.push_back(run_indicator_suite(seed + 2, 20, tol));
    reports.push_back(run_quotient_suite(seed + 3, 10, tol));
    reports.push_back(run_dynamics_suite(tol));
    reports.push_back(run_pipeline_suite(seed + 5, 5, tol));
    return reports;
}

Json report_to_json(const SuiteReport& r) {
    Json laws = Json::array();
    for (const auto& l : r.laws)
        laws.push_back(Json{{"law", l.law},
                            {"pass", l.pass},
                            {"measured", l.measured},
                            {"bound", l.bound},
                            {"draws", l.draws},
                            {"note", l.note}});
    return Json{{"schema", "suite-report-v1"},
                {"suite", r.suite},
                {"seed", r.seed},
                {"pass", r.pass},
                {"laws", std::move(laws)}};
}

Json reports_to_json(const std::vector<SuiteReport>& rs, std::uint64_t seed,
                     const Tolerances& tol) {
    Json suites = Json::array();
    bool pass = true;
    for (const auto& r : rs) {
        pass = pass && r.pass;
        suites.push_back(report_to_json(r));
    }
    return Json{{"schema", "suite-bundle-v1"},
                {"seed", seed},
                {"tolerances",
                 Json{{"tau_zero", tol.tau_zero},
                      {"tau_sing", tol.tau_sing},
                      {"tau_eq", tol.tau_eq}}},
                {"pass", pass},
                {"suites", std::move(suites)}};
}

} // namespace dsh
