/* dynamics.cpp — exact return-time partitions of a rational circle rotation
 * and the presentations, elements, and inclusion maps they induce. */
#include "dsh/dynamics.hpp"

#include "dsh/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dsh {

namespace {

long guard_limit(const RotationSystem& sys) {
    const BigInt den = boost::multiprecision::denominator(sys.alpha);
    require(den <= BigInt(1000000000), "dynamics.huge-denominator", "dynamics",
            "guard_limit", "the rotation denominator bounds probe loops",
            "denominator exceeds 1e9");
    return static_cast<long>(den);
}

const Arc& arc_at(const RotationSystem& sys, int s_index, const char* op) {
    require(0 <= s_index && s_index < static_cast<int>(sys.arcs.size()),
            "dynamics.arc-range", "dynamics", op,
            "the arc index must name a system arc",
            "got " + std::to_string(s_index) + " with " +
                std::to_string(sys.arcs.size()) + " arc(s)");
    return sys.arcs[static_cast<size_t>(s_index)];
}

/// One maximal subinterval of constant return time.
struct Piece {
    Rat lo, hi;
    int r = 0;
};

/// The closure [L, R] of the constant-return component containing m, from
/// exact cuts: m's class is inside one mod-1 copy of the arc's r-step
/// preimage and outside every copy of the k-step preimages for k < r.
Piece component_at(const RotationSystem& sys, const Arc& s, const Rat& m, int r) {
    const Rat len = s.hi - s.lo;
    Rat L = s.lo;
    Rat R = s.hi;
    bool anchored = false;
    const Rat a_r = mod1(s.lo - Rat(r) * sys.alpha);
    for (int shift = -1; shift <= 1 && !anchored; ++shift) {
        const Rat c = a_r + shift;
        if (c <= m && m <= c + len) {
            if (c > L) L = c;
            if (c + len < R) R = c + len;
            anchored = true;
        }
    }
    require(anchored, "dynamics.partition-internal", "dynamics",
            "return_partition", "a probe must sit inside its return preimage",
            "no mod-1 copy contains the probe");
    for (int k = 1; k < r; ++k) {
        const Rat a_k = mod1(s.lo - Rat(k) * sys.alpha);
        for (int shift = -1; shift <= 1; ++shift) {
            const Rat c = a_k + shift;
            const Rat d = c + len;
            if (d < m) {
                if (d > L) L = d;
            } else if (c > m) {
                if (c < R) R = c;
            } else {
                // m inside a shorter-return preimage contradicts lambda(m) = r.
                require(false, "dynamics.partition-internal", "dynamics",
                        "return_partition",
                        "probes must avoid shorter-return preimages",
                        "copy of step " + std::to_string(k) + " contains the probe");
            }
        }
    }
    return Piece{L, R, r};
}

std::vector<Piece> split_by_return(const RotationSystem& sys, int s_index) {
    const Arc& s = arc_at(sys, s_index, "return_partition");
    std::vector<Piece> pieces;
    std::vector<std::pair<Rat, Rat>> gaps{{s.lo, s.hi}};
    while (!gaps.empty()) {
        const auto [a, b] = gaps.back();
        gaps.pop_back();
        if (!(a < b)) continue;
        const Rat m = (a + b) / 2;
        const int r = first_return(sys, s_index, m);
        Piece piece = component_at(sys, s, m, r);
        if (a < piece.lo) gaps.push_back({a, piece.lo});
        if (piece.hi < b) gaps.push_back({piece.hi, b});
        pieces.push_back(std::move(piece));
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& x, const Piece& y) { return x.lo < y.lo; });
    require(!pieces.empty() && pieces.front().lo == s.lo && pieces.back().hi == s.hi,
            "dynamics.partition-internal", "dynamics", "return_partition",
            "the classes must cover the arc", "coverage gap at the ends");
    for (size_t t = 0; t + 1 < pieces.size(); ++t) {
        require(pieces[t].hi == pieces[t + 1].lo, "dynamics.partition-internal",
                "dynamics", "return_partition",
                "adjacent classes must share endpoints",
                "gap after piece " + std::to_string(t + 1));
    }
    return pieces;
}

int level_of_time(const ReturnPartition& part, int r, const char* op) {
    for (size_t i = 0; i < part.levels.size(); ++i) {
        if (part.levels[i].n == r) return static_cast<int>(i) + 1;
    }
    throw Error("dynamics.unknown-return-time", "dynamics", op,
                "every walked return time must have a partition level",
                "no level with return time " + std::to_string(r));
}

/// Successive outer-arc visits of x filling a span of total steps: the point
/// itself, then each return image, with the level of each visit's own return
/// time.  Used for decompositions (span = n_i of the Y point's level) and for
/// inclusion tables (span = n_i of the inner presentation's level).
struct Visit {
    Rat point;
    int level = 0;      // level index within the outer partition
    int time = 0;       // that level's return time
};

std::vector<Visit> visit_walk(const RotationSystem& sys, int s_index,
                              const ReturnPartition& part, const Rat& start,
                              int span, const char* op) {
    std::vector<Visit> visits;
    Rat z = start;
    int total = 0;
    while (total < span) {
        const int r = first_return(sys, s_index, z);
        require(total + r <= span, "dynamics.visit-overflow", "dynamics", op,
                "visit times must fill the span exactly",
                "span " + std::to_string(span) + " broken at offset " +
                    std::to_string(total) + " by return time " + std::to_string(r));
        visits.push_back({z, level_of_time(part, r, op), r});
        z = rotate(sys, z, r);
        total += r;
    }
    return visits;
}

} // namespace

std::vector<std::string> validate_system(const RotationSystem& sys) {
    std::vector<std::string> report;
    if (!(Rat(0) < sys.alpha && sys.alpha < Rat(1)))
        report.push_back("alpha must lie strictly between 0 and 1");
    if (sys.arcs.empty()) report.push_back("the system has no arcs");
    for (size_t t = 0; t < sys.arcs.size(); ++t) {
        const Arc& a = sys.arcs[t];
        const std::string at = "arc " + std::to_string(t);
        if (!(Rat(0) <= a.lo && a.lo < a.hi && a.hi <= Rat(1)))
            report.push_back(at + ": endpoints must satisfy 0 <= lo < hi <= 1");
        if (a.hi - a.lo >= Rat(1))
            report.push_back(at + ": must be a proper subarc of the circle");
        if (t > 0 && !sys.arcs[t - 1].contains_arc(a))
            report.push_back(at + ": not contained in arc " + std::to_string(t - 1));
    }
    return report;
}

Rat rotate(const RotationSystem& sys, const Rat& x, long steps) {
    return mod1(x + Rat(steps) * sys.alpha);
}

int first_return(const RotationSystem& sys, int s_index, const Rat& x) {
    const Arc& s = arc_at(sys, s_index, "first_return");
    require(s.contains(mod1(x)), "dynamics.point-outside-arc", "dynamics",
            "first_return", "the start point must lie in the arc",
            rat_to_string(x) + " outside [" + rat_to_string(s.lo) + ", " +
                rat_to_string(s.hi) + "]");
    const long guard = guard_limit(sys);
    Rat z = mod1(x);
    for (long k = 1; k <= guard; ++k) {
        z = mod1(z + sys.alpha);
        if (s.contains(z)) return static_cast<int>(k);
    }
    throw Error("dynamics.guard-exceeded", "dynamics", "first_return",
                "orbits must return within the denominator guard",
                "no return within " + std::to_string(guard) + " steps from " +
                    rat_to_string(x));
}

ReturnPartition return_partition(const RotationSystem& sys, int s_index) {
    {
        const std::vector<std::string> report = validate_system(sys);
        require(report.empty(), "dynamics.bad-system", "dynamics",
                "return_partition", "the system must validate",
                report.empty() ? "" : report.front());
    }
    const std::vector<Piece> pieces = split_by_return(sys, s_index);
    std::map<int, ReturnLevel> by_time;
    for (const Piece& piece : pieces) {
        ReturnLevel& lv = by_time[piece.r];
        lv.n = piece.r;
        lv.intervals.push_back(Arc{piece.lo, piece.hi});
    }
    ReturnPartition part;
    Rat tiled = 0;
    for (auto& [r, lv] : by_time) {
        std::set<Rat> ys;
        for (const Arc& iv : lv.intervals) {
            tiled += Rat(r) * (iv.hi - iv.lo);
            for (const Rat& e : {iv.lo, iv.hi}) {
                if (first_return(sys, s_index, e) != r) ys.insert(e);
            }
        }
        lv.y_points.assign(ys.begin(), ys.end());
        part.levels.push_back(std::move(lv));
    }
    require(tiled == Rat(1), "dynamics.tiling-failure", "dynamics",
            "return_partition",
            "return towers must tile the circle exactly",
            "total tower measure is " + rat_to_string(tiled));
    return part;
}

PresentationPtr build_presentation(const RotationSystem& sys, int s_index,
                                   int grid_points,
                                   const std::vector<Rat>& extra) {
    require(grid_points >= 1, "dynamics.grid-too-coarse", "dynamics",
            "build_presentation",
            "at least one interior sample per subinterval is required",
            "got " + std::to_string(grid_points));
    const Arc& s = arc_at(sys, s_index, "build_presentation");
    const ReturnPartition part = return_partition(sys, s_index);
    const int num = static_cast<int>(part.levels.size());

    std::vector<std::set<Rat>> samples(static_cast<size_t>(num));
    for (int i = 0; i < num; ++i) {
        for (const Arc& iv : part.levels[static_cast<size_t>(i)].intervals) {
            for (int t = 0; t <= grid_points + 1; ++t) {
                samples[static_cast<size_t>(i)].insert(
                    iv.lo + (iv.hi - iv.lo) * Rat(t) / Rat(grid_points + 1));
            }
        }
    }
    for (const Rat& z : extra) {
        require(s.contains(mod1(z)), "dynamics.extra-outside-arc", "dynamics",
                "build_presentation", "extra samples must lie in the arc",
                rat_to_string(z) + " is outside");
        bool placed = false;
        for (int i = 0; i < num; ++i) {
            for (const Arc& iv : part.levels[static_cast<size_t>(i)].intervals) {
                if (iv.contains(mod1(z))) {
                    samples[static_cast<size_t>(i)].insert(mod1(z));
                    placed = true;
                }
            }
        }
        require(placed, "dynamics.partition-internal", "dynamics",
                "build_presentation", "arc points must land in some class",
                rat_to_string(z) + " missed every subinterval");
    }

    // Decomposition walks for Y points; close the grid over every source.
    std::map<std::pair<int, Rat>, std::vector<Visit>> y_walks;
    for (int i = 0; i < num; ++i) {
        const ReturnLevel& lv = part.levels[static_cast<size_t>(i)];
        for (const Rat& y : lv.y_points) {
            std::vector<Visit> walk =
                visit_walk(sys, s_index, part, y, lv.n, "build_presentation");
            for (const Visit& v : walk) {
                samples[static_cast<size_t>(v.level - 1)].insert(v.point);
            }
            y_walks[{i + 1, y}] = std::move(walk);
        }
    }

    std::vector<Level> levels(static_cast<size_t>(num));
    for (int i = 0; i < num; ++i) {
        const ReturnLevel& src = part.levels[static_cast<size_t>(i)];
        Level& lv = levels[static_cast<size_t>(i)];
        lv.n = src.n;
        for (const Rat& z : samples[static_cast<size_t>(i)]) {
            lv.points.push_back(Point{rat_to_string(z), {to_double(z)}});
        }
        for (const Rat& y : src.y_points) {
            lv.y_ids.push_back(rat_to_string(y));
            std::vector<Source> srcs;
            for (const Visit& v : y_walks.at({i + 1, y})) {
                srcs.push_back(Source{v.level, rat_to_string(v.point)});
            }
            lv.decomp[rat_to_string(y)] = std::move(srcs);
        }
    }
    auto p = std::make_shared<const Presentation>(std::move(levels));
    p->require_valid("dynamics", "build_presentation");
    return p;
}

Element generator_image(const RotationSystem& sys, int s_index,
                        const PresentationPtr& p, const Generator& gen) {
    require(p != nullptr, "dynamics.null-presentation", "dynamics",
            "generator_image", "a presentation is required", "got null");
    require(static_cast<bool>(gen.sample), "dynamics.null-generator", "dynamics",
            "generator_image", "the generator needs a sample function", "got none");
    const Arc& s = arc_at(sys, s_index, "generator_image");
    std::vector<std::vector<Mat>> vals(static_cast<size_t>(p->num_levels()));
    for (int i = 1; i <= p->num_levels(); ++i) {
        const Level& lv = p->level(i);
        auto& row = vals[static_cast<size_t>(i - 1)];
        row.reserve(lv.points.size());
        for (const Point& pt : lv.points) {
            const Rat x = rat_from_string(pt.id);
            if (gen.kind == Generator::Kind::Shifted) {
                require(gen.sample(x) == Cplx(0.0, 0.0), "dynamics.shift-on-arc",
                        "dynamics", "generator_image",
                        "shifted data must vanish on the arc exactly",
                        "nonzero value at " + pt.id);
            }
            Mat m = Mat::Zero(lv.n, lv.n);
            if (gen.kind == Generator::Kind::Function) {
                for (int t = 1; t <= lv.n; ++t) {
                    m(t - 1, t - 1) = gen.sample(rotate(sys, x, t));
                }
            } else {
                for (int t = 1; t <= lv.n - 1; ++t) {
                    const Rat z = rotate(sys, x, t);
                    const Cplx g = gen.sample(z);
                    if (s.contains(z)) {
                        require(g == Cplx(0.0, 0.0), "dynamics.shift-on-arc",
                                "dynamics", "generator_image",
                                "shifted data must vanish on the arc exactly",
                                "nonzero value at " + rat_to_string(z));
                    }
                    m(t, t - 1) = g;
                }
            }
            row.push_back(std::move(m));
        }
    }
    // Deliberately not re-derived: the constraints must hold because orbits
    // of Y points revisit their sources, which the tests measure directly.
    return Element(p, std::move(vals));
}

DiagonalMap build_inclusion(const RotationSystem& sys, int outer, int inner,
                            PresentationPtr source_p, PresentationPtr target_p) {
    require(source_p != nullptr && target_p != nullptr,
            "dynamics.null-presentation", "dynamics", "build_inclusion",
            "both presentations are required", "got null");
    arc_at(sys, outer, "build_inclusion");
    arc_at(sys, inner, "build_inclusion");
    require(outer <= inner, "dynamics.arcs-not-nested", "dynamics",
            "build_inclusion", "the outer arc must contain the inner arc",
            "outer index " + std::to_string(outer) + " after inner " +
                std::to_string(inner));
    if (outer == inner) {
        require(source_p == target_p || same_presentation(*source_p, *target_p),
                "dynamics.arcs-not-nested", "dynamics", "build_inclusion",
                "equal arcs need equal presentations", "structures differ");
        return identity_map(source_p);
    }
    const ReturnPartition part = return_partition(sys, outer);
    DiagonalMap m;
    m.source = source_p;
    m.target = target_p;
    m.table.resize(static_cast<size_t>(target_p->num_levels()));
    for (int i = 1; i <= target_p->num_levels(); ++i) {
        const Level& lv = target_p->level(i);
        auto& row = m.table[static_cast<size_t>(i - 1)];
        row.reserve(lv.points.size());
        for (const Point& pt : lv.points) {
            const Rat x = rat_from_string(pt.id);
            std::vector<Source> entry;
            for (const Visit& v :
                 visit_walk(sys, outer, part, x, lv.n, "build_inclusion")) {
                const std::string id = rat_to_string(v.point);
                require(source_p->has_point(v.level, id),
                        "dynamics.missing-visit-point", "dynamics",
                        "build_inclusion",
                        "visit points must be sampled in the source",
                        "point " + id + " at level " + std::to_string(v.level) +
                            " (build the source with these extras)");
                entry.push_back(Source{v.level, id});
            }
            row.push_back(std::move(entry));
        }
    }
    return m;
}

Chain build_chain(const RotationSystem& sys, int grid_points) {
    {
        const std::vector<std::string> report = validate_system(sys);
        require(report.empty(), "dynamics.bad-system", "dynamics", "build_chain",
                "the system must validate", report.empty() ? "" : report.front());
    }
    const int k = static_cast<int>(sys.arcs.size());
    require(k >= 2, "dynamics.too-few-arcs", "dynamics", "build_chain",
            "a chain needs at least two arcs", "got " + std::to_string(k));
    std::vector<PresentationPtr> ps(static_cast<size_t>(k));
    ps[static_cast<size_t>(k - 1)] = build_presentation(sys, k - 1, grid_points);
    for (int t = k - 2; t >= 0; --t) {
        const ReturnPartition part = return_partition(sys, t);
        const PresentationPtr& finer = ps[static_cast<size_t>(t + 1)];
        std::set<Rat> extra;
        for (int i = 1; i <= finer->num_levels(); ++i) {
            const Level& lv = finer->level(i);
            for (const Point& pt : lv.points) {
                for (const Visit& v : visit_walk(sys, t, part,
                                                 rat_from_string(pt.id), lv.n,
                                                 "build_chain")) {
                    extra.insert(v.point);
                }
            }
        }
        ps[static_cast<size_t>(t)] = build_presentation(
            sys, t, grid_points, std::vector<Rat>(extra.begin(), extra.end()));
    }
    Chain chain;
    chain.algebras = ps;
    for (int t = 0; t + 1 < k; ++t) {
        chain.maps.push_back(build_inclusion(sys, t, t + 1,
                                             ps[static_cast<size_t>(t)],
                                             ps[static_cast<size_t>(t + 1)]));
    }
    {
        const std::vector<std::string> report = validate_chain(chain);
        require(report.empty(), "dynamics.bad-chain", "dynamics", "build_chain",
                "the assembled chain must validate",
                report.empty() ? "" : report.front());
    }
    return chain;
}

} // namespace dsh
