/* maps.cpp — diagonal maps, chains, quotients, and the homogeneous collapse. */
#include "dsh/maps.hpp"

#include "dsh/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace dsh {

namespace {

using PointKey = std::pair<int, std::string>;

bool entries_equal(const std::vector<Source>& a, const std::vector<Source>& b) {
    if (a.size() != b.size()) return false;
    for (size_t t = 0; t < a.size(); ++t) {
        if (a[t].level != b[t].level || a[t].point != b[t].point) return false;
    }
    return true;
}

/// The free source points under one table entry, with Y references unfolded
/// through their (free) decomposition sources.
std::set<PointKey> unfold_entry(const Presentation& src,
                                const std::vector<Source>& entry) {
    std::set<PointKey> out;
    for (const Source& s : entry) {
        if (src.is_y(s.level, s.point)) {
            for (const Source& t : src.sources(s.level, s.point)) {
                out.insert({t.level, t.point});
            }
        } else {
            out.insert({s.level, s.point});
        }
    }
    return out;
}

const std::vector<Source>& table_entry(const DiagonalMap& m, int i, int pos) {
    require(1 <= i && i <= static_cast<int>(m.table.size()), "map.level-range",
            "dshmaps", "table_entry", "table must cover the target level",
            "level " + std::to_string(i) + " of " + std::to_string(m.table.size()));
    const auto& row = m.table[static_cast<size_t>(i - 1)];
    require(0 <= pos && pos < static_cast<int>(row.size()), "map.point-range",
            "dshmaps", "table_entry", "table must cover the target point",
            "position " + std::to_string(pos) + " at level " + std::to_string(i));
    return row[static_cast<size_t>(pos)];
}

} // namespace

std::vector<std::string> validate_map(const DiagonalMap& m) {
    std::vector<std::string> report;
    auto note = [&report](const std::string& msg) { report.push_back(msg); };
    if (!m.source || !m.target) {
        note("map is missing its source or target presentation");
        return report;
    }
    const Presentation& src = *m.source;
    const Presentation& tgt = *m.target;
    if (static_cast<int>(m.table.size()) != tgt.num_levels()) {
        note("table has " + std::to_string(m.table.size()) + " level row(s), expected " +
             std::to_string(tgt.num_levels()));
        return report;
    }
    for (int i = 1; i <= tgt.num_levels(); ++i) {
        const Level& lv = tgt.level(i);
        const auto& row = m.table[static_cast<size_t>(i - 1)];
        const std::string at = "target level " + std::to_string(i);
        if (row.size() != lv.points.size()) {
            note(at + ": " + std::to_string(row.size()) + " entries for " +
                 std::to_string(lv.points.size()) + " point(s)");
            continue;
        }
        for (size_t q = 0; q < lv.points.size(); ++q) {
            const std::string& id = lv.points[q].id;
            const auto& entry = row[q];
            if (entry.empty()) {
                note(at + ": empty entry at point '" + id + "'");
                continue;
            }
            int total = 0;
            bool refs_ok = true;
            for (const Source& s : entry) {
                if (s.level < 1 || s.level > src.num_levels()) {
                    note(at + ": entry at '" + id + "' references source level " +
                         std::to_string(s.level));
                    refs_ok = false;
                    continue;
                }
                if (!src.has_point(s.level, s.point)) {
                    note(at + ": entry at '" + id + "' references missing source point '" +
                         s.point + "' at level " + std::to_string(s.level));
                    refs_ok = false;
                    continue;
                }
                total += src.size_at(s.level);
            }
            if (refs_ok && total != lv.n) {
                note(at + ": entry at '" + id + "' has size sum " +
                     std::to_string(total) + ", expected " + std::to_string(lv.n));
            }
        }
        // Entries at Y points must be the concatenation of the entries at the
        // decomposition sources, so images of valid elements stay valid.
        for (const std::string& y : lv.y_ids) {
            if (!lv.decomp.count(y) || !tgt.has_point(i, y)) continue;
            std::vector<Source> expected;
            bool sources_ok = true;
            for (const Source& s : lv.decomp.at(y)) {
                if (s.level < 1 || s.level > tgt.num_levels() ||
                    !tgt.has_point(s.level, s.point)) {
                    sources_ok = false;
                    break;
                }
                const auto& sub = m.table[static_cast<size_t>(s.level - 1)];
                const int sp = tgt.point_pos(s.level, s.point);
                if (sp >= static_cast<int>(sub.size())) {
                    sources_ok = false;
                    break;
                }
                const auto& part = sub[static_cast<size_t>(sp)];
                expected.insert(expected.end(), part.begin(), part.end());
            }
            if (!sources_ok) continue;
            const int yp = tgt.point_pos(i, y);
            if (yp < static_cast<int>(row.size()) &&
                !entries_equal(row[static_cast<size_t>(yp)], expected)) {
                note(at + ": entry at Y point '" + y +
                     "' does not match the concatenated source entries");
            }
        }
    }
    return report;
}

DiagonalMap identity_map(PresentationPtr p) {
    require(p != nullptr, "map.null-presentation", "dshmaps", "identity_map",
            "a map needs a presentation", "got null");
    DiagonalMap m;
    m.source = p;
    m.target = p;
    m.table.resize(static_cast<size_t>(p->num_levels()));
    for (int i = 1; i <= p->num_levels(); ++i) {
        const Level& lv = p->level(i);
        auto& row = m.table[static_cast<size_t>(i - 1)];
        row.resize(lv.points.size());
        for (size_t q = 0; q < lv.points.size(); ++q) {
            const std::string& id = lv.points[q].id;
            if (p->is_y(i, id)) {
                row[q] = p->sources(i, id);
            } else {
                row[q] = {Source{i, id}};
            }
        }
    }
    return m;
}

DiagonalMap compose_maps(const DiagonalMap& outer, const DiagonalMap& inner) {
    require(outer.source && inner.target &&
                (outer.source == inner.target ||
                 same_presentation(*outer.source, *inner.target)),
            "map.endpoint-mismatch", "dshmaps", "compose_maps",
            "inner target must equal outer source", "structures differ");
    DiagonalMap m;
    m.source = inner.source;
    m.target = outer.target;
    m.table.resize(outer.table.size());
    for (size_t li = 0; li < outer.table.size(); ++li) {
        m.table[li].resize(outer.table[li].size());
        for (size_t q = 0; q < outer.table[li].size(); ++q) {
            std::vector<Source>& entry = m.table[li][q];
            for (const Source& s : outer.table[li][q]) {
                const int sp = inner.target->point_pos(s.level, s.point);
                const auto& part = table_entry(inner, s.level, sp);
                entry.insert(entry.end(), part.begin(), part.end());
            }
        }
    }
    return m;
}

Element apply_map(const DiagonalMap& m, const Element& f) {
    require(m.source && m.target, "map.null-presentation", "dshmaps",
            "apply_map", "a map needs both endpoints", "got null");
    require(f.pres_ptr() == m.source || same_presentation(f.pres(), *m.source),
            "map.element-mismatch", "dshmaps", "apply_map",
            "the element must live over the map's source", "structures differ");
    const Presentation& tgt = *m.target;
    std::vector<std::vector<Mat>> vals(static_cast<size_t>(tgt.num_levels()));
    for (int i = 1; i <= tgt.num_levels(); ++i) {
        const Level& lv = tgt.level(i);
        auto& row = vals[static_cast<size_t>(i - 1)];
        row.reserve(lv.points.size());
        for (size_t q = 0; q < lv.points.size(); ++q) {
            const auto& entry = table_entry(m, i, static_cast<int>(q));
            std::vector<Mat> blocks;
            blocks.reserve(entry.size());
            for (const Source& s : entry) {
                blocks.push_back(f.value(s.level, s.point));
            }
            Mat v = direct_sum(blocks);
            require(v.rows() == lv.n, "map.size-mismatch", "dshmaps", "apply_map",
                    "table entries must fill the target matrix",
                    "level " + std::to_string(i) + " point '" + lv.points[q].id +
                        "' assembles to size " + std::to_string(v.rows()) +
                        ", expected " + std::to_string(lv.n));
            row.push_back(std::move(v));
        }
    }
    return Element(m.target, std::move(vals));
}

std::vector<SpectrumPoint> spectrum_multimap(const DiagonalMap& m, int i,
                                             const std::string& id) {
    require(m.source && m.target, "map.null-presentation", "dshmaps",
            "spectrum_multimap", "a map needs both endpoints", "got null");
    require(!m.target->is_y(i, id), "map.point-in-y", "dshmaps",
            "spectrum_multimap", "the query point must be free",
            "point '" + id + "' lies in Y at level " + std::to_string(i));
    const int pos = m.target->point_pos(i, id);
    const std::set<PointKey> keys = unfold_entry(*m.source, table_entry(m, i, pos));
    std::vector<SpectrumPoint> out;
    out.reserve(keys.size());
    for (const PointKey& k : keys) out.push_back({k.first, k.second});
    return out;
}

std::vector<std::string> validate_chain(const Chain& c) {
    std::vector<std::string> report;
    if (c.algebras.empty()) {
        report.push_back("chain has no algebras");
        return report;
    }
    if (c.maps.size() + 1 != c.algebras.size()) {
        report.push_back("chain has " + std::to_string(c.maps.size()) +
                         " map(s) for " + std::to_string(c.algebras.size()) +
                         " algebra(s)");
        return report;
    }
    for (size_t t = 0; t < c.algebras.size(); ++t) {
        if (!c.algebras[t]) {
            report.push_back("algebra " + std::to_string(t + 1) + " is null");
            continue;
        }
        for (const std::string& v : c.algebras[t]->validate()) {
            report.push_back("algebra " + std::to_string(t + 1) + ": " + v);
        }
    }
    for (size_t t = 0; t < c.maps.size(); ++t) {
        const DiagonalMap& m = c.maps[t];
        const std::string at = "map " + std::to_string(t + 1);
        if (m.source != c.algebras[t] &&
            !(m.source && c.algebras[t] && same_presentation(*m.source, *c.algebras[t]))) {
            report.push_back(at + ": source is not algebra " + std::to_string(t + 1));
        }
        if (m.target != c.algebras[t + 1] &&
            !(m.target && c.algebras[t + 1] &&
              same_presentation(*m.target, *c.algebras[t + 1]))) {
            report.push_back(at + ": target is not algebra " + std::to_string(t + 2));
        }
        for (const std::string& v : validate_map(m)) {
            report.push_back(at + ": " + v);
        }
    }
    return report;
}

namespace {

/// Pullback of one free point of algebras[idx_to] to free points of
/// algebras[idx_from] through the chain's maps (0-based algebra indices).
std::set<PointKey> pull_back(const Chain& c, int idx_from, int idx_to,
                             const PointKey& pt) {
    std::set<PointKey> cur{pt};
    for (int t = idx_to - 1; t >= idx_from; --t) {
        const DiagonalMap& m = c.maps[static_cast<size_t>(t)];
        std::set<PointKey> next;
        for (const PointKey& k : cur) {
            const int pos = m.target->point_pos(k.first, k.second);
            const std::set<PointKey> part =
                unfold_entry(*m.source, table_entry(m, k.first, pos));
            next.insert(part.begin(), part.end());
        }
        cur = std::move(next);
    }
    return cur;
}

} // namespace

std::optional<int> check_propagation(const Chain& c, int j,
                                     const std::vector<SpectrumPoint>& u) {
    require(!u.empty(), "map.empty-set", "dshmaps", "check_propagation",
            "the probe set must be nonempty", "got an empty set");
    const int K = static_cast<int>(c.algebras.size());
    require(1 <= j && j <= K, "map.level-range", "dshmaps", "check_propagation",
            "the start index must name a chain algebra",
            "got j = " + std::to_string(j) + " with K = " + std::to_string(K));
    const Presentation& a_j = *c.algebras[static_cast<size_t>(j - 1)];
    std::map<int, std::vector<std::string>> by_level;
    std::set<PointKey> u_set;
    for (const SpectrumPoint& sp : u) {
        by_level[sp.level].push_back(sp.point);
        u_set.insert({sp.level, sp.point});
    }
    for (const auto& [lvl, ids] : by_level) {
        require(is_open_in_spectrum(a_j, lvl, ids), "map.not-open", "dshmaps",
                "check_propagation",
                "the probe set must be open in the spectrum",
                "a point at level " + std::to_string(lvl) +
                    " is sourced by a later level");
    }
    for (int jp = j + 1; jp <= K; ++jp) {
        const Presentation& a_jp = *c.algebras[static_cast<size_t>(jp - 1)];
        bool all_meet = true;
        for (const SpectrumPoint& x : enumerate_spectrum(a_jp)) {
            const std::set<PointKey> pulled =
                pull_back(c, j - 1, jp - 1, {x.level, x.point});
            bool meets = false;
            for (const PointKey& k : pulled) {
                if (u_set.count(k)) {
                    meets = true;
                    break;
                }
            }
            if (!meets) {
                all_meet = false;
                break;
            }
        }
        if (all_meet) return jp;
    }
    return std::nullopt;
}

std::optional<int> find_big_enough(const Chain& c, int j, int m) {
    const int K = static_cast<int>(c.algebras.size());
    require(1 <= j && j <= K, "map.level-range", "dshmaps", "find_big_enough",
            "the start index must name a chain algebra",
            "got j = " + std::to_string(j) + " with K = " + std::to_string(K));
    for (int jp = j + 1; jp <= K; ++jp) {
        if (c.algebras[static_cast<size_t>(jp - 1)]->min_size() > m) return jp;
    }
    return std::nullopt;
}

QuotientResult quotient_presentation(
    const Presentation& p, const std::vector<std::pair<int, std::string>>& s) {
    std::set<PointKey> retained;
    for (const auto& [lvl, id] : s) {
        require(p.has_point(lvl, id), "presentation.unknown-point", "dshmaps",
                "quotient_presentation", "retained points must exist",
                "no point '" + id + "' at level " + std::to_string(lvl));
        retained.insert({lvl, id});
    }
    // Saturation: a retained Y point keeps all of its sources.
    for (const auto& [lvl, id] : retained) {
        if (!p.is_y(lvl, id)) continue;
        for (const Source& src : p.sources(lvl, id)) {
            require(retained.count({src.level, src.point}) > 0,
                    "map.not-saturated", "dshmaps", "quotient_presentation",
                    "retained Y points must keep all their sources",
                    "Y point '" + id + "' at level " + std::to_string(lvl) +
                        " lost source '" + src.point + "' at level " +
                        std::to_string(src.level));
        }
    }
    // A Y point whose sources all survive is kept automatically: the
    // constraint it carries still has all of its participants.
    for (int i = 1; i <= p.num_levels(); ++i) {
        for (const std::string& y : p.level(i).y_ids) {
            bool all_kept = true;
            for (const Source& src : p.sources(i, y)) {
                if (!retained.count({src.level, src.point})) {
                    all_kept = false;
                    break;
                }
            }
            if (all_kept) retained.insert({i, y});
        }
    }

    QuotientMap gamma;
    gamma.level_map.assign(static_cast<size_t>(p.num_levels()), 0);
    gamma.kept.resize(static_cast<size_t>(p.num_levels()));
    std::vector<Level> q_levels;
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        Level out;
        out.n = lv.n;
        auto& kept = gamma.kept[static_cast<size_t>(i - 1)];
        for (size_t q = 0; q < lv.points.size(); ++q) {
            if (!retained.count({i, lv.points[q].id})) continue;
            kept.push_back(static_cast<int>(q));
            out.points.push_back(lv.points[q]);
        }
        if (out.points.empty()) continue;   // level dropped
        for (const std::string& y : lv.y_ids) {
            if (!retained.count({i, y})) continue;
            out.y_ids.push_back(y);
            out.decomp[y] = lv.decomp.at(y);
        }
        gamma.level_map[static_cast<size_t>(i - 1)] =
            static_cast<int>(q_levels.size()) + 1;
        q_levels.push_back(std::move(out));
    }
    // Renumber decomposition source levels to the surviving level indices.
    for (Level& lv : q_levels) {
        for (auto& [y, srcs] : lv.decomp) {
            for (Source& src : srcs) {
                const int mapped = gamma.level_map[static_cast<size_t>(src.level - 1)];
                require(mapped != 0, "map.not-saturated", "dshmaps",
                        "quotient_presentation",
                        "sources of retained Y points must survive",
                        "source level " + std::to_string(src.level) + " was dropped");
                src.level = mapped;
            }
        }
    }
    auto q = std::make_shared<const Presentation>(std::move(q_levels));
    {
        const std::vector<std::string> report = q->validate();
        if (!report.empty()) {
            std::ostringstream os;
            os << report.size() << " violation(s); first: " << report.front();
            throw Error("map.quotient-invalid", "dshmaps", "quotient_presentation",
                        "the retained set must leave a valid presentation",
                        os.str());
        }
    }
    gamma.target = q;
    return QuotientResult{q, std::move(gamma)};
}

Element restrict_element(const QuotientMap& gamma, const Element& f) {
    require(gamma.target != nullptr, "map.null-presentation", "dshmaps",
            "restrict_element", "the quotient data must carry its target",
            "got null");
    require(gamma.source == nullptr || f.pres_ptr() == gamma.source ||
                same_presentation(f.pres(), *gamma.source),
            "map.element-mismatch", "dshmaps", "restrict_element",
            "the element must live over the quotient's source", "structures differ");
    require(f.values().size() == gamma.kept.size(), "map.element-mismatch",
            "dshmaps", "restrict_element",
            "the element must live over the quotient's source",
            "level counts differ");
    std::vector<std::vector<Mat>> vals;
    for (size_t li = 0; li < gamma.kept.size(); ++li) {
        if (gamma.level_map[li] == 0) continue;
        std::vector<Mat> row;
        row.reserve(gamma.kept[li].size());
        for (int pos : gamma.kept[li]) {
            row.push_back(f.values()[li][static_cast<size_t>(pos)]);
        }
        vals.push_back(std::move(row));
    }
    return Element(gamma.target, std::move(vals));
}

Chain injectivize_chain(const Chain& c) {
    const int K = static_cast<int>(c.algebras.size());
    require(K >= 1, "map.empty-chain", "dshmaps", "injectivize_chain",
            "the chain must have at least one algebra", "got none");
    // Free points of each algebra actually reached from the final one,
    // walking the maps backwards and unfolding Y references.
    std::vector<std::set<PointKey>> reach(static_cast<size_t>(K));
    for (const SpectrumPoint& x : enumerate_spectrum(*c.algebras.back())) {
        reach[static_cast<size_t>(K - 1)].insert({x.level, x.point});
    }
    for (int t = K - 2; t >= 0; --t) {
        const DiagonalMap& m = c.maps[static_cast<size_t>(t)];
        for (const PointKey& k : reach[static_cast<size_t>(t + 1)]) {
            const int pos = m.target->point_pos(k.first, k.second);
            const std::set<PointKey> part =
                unfold_entry(*m.source, table_entry(m, k.first, pos));
            reach[static_cast<size_t>(t)].insert(part.begin(), part.end());
        }
    }

    Chain out;
    std::vector<QuotientMap> gammas;
    for (int t = 0; t < K; ++t) {
        std::vector<std::pair<int, std::string>> s;
        for (const PointKey& k : reach[static_cast<size_t>(t)]) s.push_back(k);
        QuotientResult qr = quotient_presentation(*c.algebras[static_cast<size_t>(t)], s);
        qr.gamma.source = c.algebras[static_cast<size_t>(t)];
        out.algebras.push_back(qr.quotient);
        gammas.push_back(std::move(qr.gamma));
    }
    for (int t = 0; t + 1 < K; ++t) {
        const DiagonalMap& m = c.maps[static_cast<size_t>(t)];
        const QuotientMap& gs = gammas[static_cast<size_t>(t)];
        const QuotientMap& gt = gammas[static_cast<size_t>(t + 1)];
        DiagonalMap im;
        im.source = out.algebras[static_cast<size_t>(t)];
        im.target = out.algebras[static_cast<size_t>(t + 1)];
        im.table.resize(static_cast<size_t>(im.target->num_levels()));
        for (size_t li = 0; li < gt.kept.size(); ++li) {
            if (gt.level_map[li] == 0) continue;
            auto& row = im.table[static_cast<size_t>(gt.level_map[li] - 1)];
            for (int pos : gt.kept[li]) {
                std::vector<Source> entry =
                    table_entry(m, static_cast<int>(li) + 1, pos);
                for (Source& src : entry) {
                    const int mapped =
                        gs.level_map[static_cast<size_t>(src.level - 1)];
                    require(mapped != 0 && im.source->has_point(mapped, src.point),
                            "map.reach-incoherent", "dshmaps", "injectivize_chain",
                            "reached points must keep their table references",
                            "point '" + src.point + "' at source level " +
                                std::to_string(src.level) + " was dropped");
                    src.level = mapped;
                }
                row.push_back(std::move(entry));
            }
        }
        out.maps.push_back(std::move(im));
    }
    return out;
}

CollapsedSpace collapse_homogeneous(const Presentation& p) {
    p.require_valid("dshmaps", "collapse_homogeneous");
    const int n = p.min_size();
    require(n == p.max_size(), "map.not-homogeneous", "dshmaps",
            "collapse_homogeneous", "all matrix sizes must be equal",
            "sizes range from " + std::to_string(n) + " to " +
                std::to_string(p.max_size()));
    // Every Y point then has exactly one source; glue it to that source.
    std::map<PointKey, std::vector<PointKey>> glued;   // free rep -> Y members
    for (int i = 1; i <= p.num_levels(); ++i) {
        for (const std::string& y : p.level(i).y_ids) {
            const std::vector<Source>& srcs = p.sources(i, y);
            require(srcs.size() == 1, "map.multi-source-y", "dshmaps",
                    "collapse_homogeneous",
                    "homogeneous Y points have a unique source",
                    "point '" + y + "' at level " + std::to_string(i) + " has " +
                        std::to_string(srcs.size()) + " sources");
            glued[{srcs[0].level, srcs[0].point}].push_back({i, y});
        }
    }
    CollapsedSpace space;
    space.n = n;
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        for (size_t q = 0; q < lv.points.size(); ++q) {
            const std::string& id = lv.points[q].id;
            if (p.is_y(i, id)) continue;
            CollapsedClass cls;
            cls.rep = {i, id};
            cls.members.push_back({i, id});
            auto it = glued.find({i, id});
            if (it != glued.end()) {
                cls.members.insert(cls.members.end(), it->second.begin(),
                                   it->second.end());
            }
            space.classes.push_back(std::move(cls));
        }
    }
    return space;
}

std::vector<Mat> collapse_transport(const CollapsedSpace& space, const Element& f) {
    std::vector<Mat> out;
    out.reserve(space.classes.size());
    for (const CollapsedClass& cls : space.classes) {
        out.push_back(f.value(cls.rep.level, cls.rep.point));
    }
    return out;
}

Element collapse_lift(PresentationPtr p, const CollapsedSpace& space,
                      const std::vector<Mat>& values) {
    require(values.size() == space.classes.size(), "map.collapse-size", "dshmaps",
            "collapse_lift", "one matrix per collapsed point is required",
            "got " + std::to_string(values.size()) + " for " +
                std::to_string(space.classes.size()) + " point(s)");
    FreeValueMap free_values;
    for (size_t k = 0; k < space.classes.size(); ++k) {
        const SpectrumPoint& rep = space.classes[k].rep;
        free_values[{rep.level, rep.point}] = values[k];
    }
    return derive_element(std::move(p), free_values);
}

} // namespace dsh
