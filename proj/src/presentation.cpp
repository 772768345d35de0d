/* presentation.cpp — presentations, validation, spectrum, and element algebra. */
#include "dsh/presentation.hpp"

#include "dsh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dsh {

double point_distance(const Point& a, const Point& b) {
    require(a.coord.size() == b.coord.size(), "presentation.metric",
            "dshcore", "point_distance",
            "points must have coordinates of equal dimension",
            "got dimensions " + std::to_string(a.coord.size()) + " and " +
                std::to_string(b.coord.size()));
    if (a.coord.size() == 1) {
        // One-dimensional coordinates live on the unit circle.
        double d = std::fabs(a.coord[0] - b.coord[0]);
        d -= std::floor(d);
        return std::min(d, 1.0 - d);
    }
    double sq = 0.0;
    for (size_t t = 0; t < a.coord.size(); ++t) {
        const double d = a.coord[t] - b.coord[t];
        sq += d * d;
    }
    return std::sqrt(sq);
}

Presentation::Presentation(std::vector<Level> levels)
    : levels_(std::move(levels)) {
    pos_.resize(levels_.size());
    y_flag_.resize(levels_.size());
    for (size_t li = 0; li < levels_.size(); ++li) {
        const Level& lv = levels_[li];
        pos_[li].reserve(lv.points.size());
        y_flag_[li].assign(lv.points.size(), 0);
        for (size_t pi = 0; pi < lv.points.size(); ++pi) {
            pos_[li].emplace(lv.points[pi].id, static_cast<int>(pi));
        }
        for (const std::string& y : lv.y_ids) {
            auto it = pos_[li].find(y);
            if (it != pos_[li].end()) y_flag_[li][static_cast<size_t>(it->second)] = 1;
        }
    }
}

const Level& Presentation::level(int i) const {
    require(1 <= i && i <= num_levels(), "presentation.level-range", "dshcore",
            "level", "level index must lie in 1..num_levels",
            "got i = " + std::to_string(i) + " with " +
                std::to_string(num_levels()) + " level(s)");
    return levels_[static_cast<size_t>(i - 1)];
}

int Presentation::min_size() const {
    require(!levels_.empty(), "presentation.empty", "dshcore", "min_size",
            "a presentation must have at least one level", "none present");
    int s = levels_[0].n;
    for (const Level& lv : levels_) s = std::min(s, lv.n);
    return s;
}

int Presentation::max_size() const {
    require(!levels_.empty(), "presentation.empty", "dshcore", "max_size",
            "a presentation must have at least one level", "none present");
    int s = levels_[0].n;
    for (const Level& lv : levels_) s = std::max(s, lv.n);
    return s;
}

bool Presentation::has_point(int i, const std::string& id) const {
    level(i);
    return pos_[static_cast<size_t>(i - 1)].count(id) > 0;
}

int Presentation::point_pos(int i, const std::string& id) const {
    level(i);
    const auto& m = pos_[static_cast<size_t>(i - 1)];
    auto it = m.find(id);
    require(it != m.end(), "presentation.unknown-point", "dshcore", "point_pos",
            "point id must exist at the level",
            "no point '" + id + "' at level " + std::to_string(i));
    return it->second;
}

const Point& Presentation::point(int i, int pos) const {
    const Level& lv = level(i);
    require(0 <= pos && pos < static_cast<int>(lv.points.size()),
            "presentation.point-range", "dshcore", "point",
            "point position must lie in 0..|X_i|-1",
            "got pos = " + std::to_string(pos) + " at level " + std::to_string(i));
    return lv.points[static_cast<size_t>(pos)];
}

bool Presentation::is_y(int i, const std::string& id) const {
    return is_y_pos(i, point_pos(i, id));
}

bool Presentation::is_y_pos(int i, int pos) const {
    point(i, pos);
    return y_flag_[static_cast<size_t>(i - 1)][static_cast<size_t>(pos)] != 0;
}

const std::vector<Source>& Presentation::sources(int i, const std::string& y_id) const {
    const Level& lv = level(i);
    auto it = lv.decomp.find(y_id);
    require(it != lv.decomp.end(), "presentation.missing-decomposition",
            "dshcore", "sources", "every Y point must carry a decomposition",
            "no entry for '" + y_id + "' at level " + std::to_string(i));
    return it->second;
}

std::vector<int> Presentation::block_starts(int i, const std::string& id) const {
    if (!is_y(i, id)) return {1};
    std::vector<int> starts;
    int at = 1;
    for (const Source& s : sources(i, id)) {
        starts.push_back(at);
        at += size_at(s.level);
    }
    return starts;
}

std::vector<std::string> Presentation::validate() const {
    std::vector<std::string> report;
    auto note = [&report](const std::string& msg) { report.push_back(msg); };
    if (levels_.empty()) {
        note("presentation has no levels");
        return report;
    }
    for (int i = 1; i <= num_levels(); ++i) {
        const Level& lv = levels_[static_cast<size_t>(i - 1)];
        const std::string at = "level " + std::to_string(i);
        if (lv.n < 1) note(at + ": matrix size must be positive, got " + std::to_string(lv.n));
        if (lv.points.empty()) note(at + ": sampled space is empty");

        // Metric sanity: unique ids, consistent dimensions, distinct coordinates.
        std::set<std::string> seen_ids;
        for (const Point& pt : lv.points) {
            if (!seen_ids.insert(pt.id).second)
                note(at + ": duplicate point id '" + pt.id + "'");
        }
        for (size_t a = 0; a < lv.points.size(); ++a) {
            if (lv.points[a].coord.size() != lv.points[0].coord.size()) {
                note(at + ": point '" + lv.points[a].id +
                     "' has coordinate dimension " +
                     std::to_string(lv.points[a].coord.size()) + ", expected " +
                     std::to_string(lv.points[0].coord.size()));
                continue;
            }
            for (size_t b = 0; b < a; ++b) {
                if (lv.points[b].coord.size() != lv.points[a].coord.size()) continue;
                if (point_distance(lv.points[a], lv.points[b]) == 0.0) {
                    note(at + ": points '" + lv.points[b].id + "' and '" +
                         lv.points[a].id + "' share coordinates");
                }
            }
        }

        // Y bookkeeping.
        std::set<std::string> y_set;
        for (const std::string& y : lv.y_ids) {
            if (!y_set.insert(y).second) note(at + ": duplicate Y id '" + y + "'");
            if (!seen_ids.count(y)) note(at + ": Y id '" + y + "' is not a point");
        }
        if (i == 1 && !lv.y_ids.empty()) note("level 1 must have empty Y");
        if (!lv.points.empty() && y_set.size() == lv.points.size() &&
            seen_ids.size() == lv.points.size())
            note(at + ": Y covers the whole space, leaving no spectrum");

        // Decomposition table: keyed exactly by Y, sized correctly, sourcing
        // distinct free points at earlier levels.
        for (const auto& [y, srcs] : lv.decomp) {
            if (!y_set.count(y))
                note(at + ": decomposition entry for non-Y point '" + y + "'");
            if (srcs.empty()) {
                note(at + ": decomposition of '" + y + "' is empty");
                continue;
            }
            int total = 0;
            std::set<std::pair<int, std::string>> seen_src;
            for (const Source& s : srcs) {
                if (s.level < 1 || s.level >= i) {
                    note(at + ": decomposition of '" + y + "' references level " +
                         std::to_string(s.level) + ", which is not earlier");
                    continue;
                }
                const Level& src_lv = levels_[static_cast<size_t>(s.level - 1)];
                total += src_lv.n;
                if (!pos_[static_cast<size_t>(s.level - 1)].count(s.point)) {
                    note(at + ": decomposition of '" + y + "' references missing point '" +
                         s.point + "' at level " + std::to_string(s.level));
                    continue;
                }
                if (std::find(src_lv.y_ids.begin(), src_lv.y_ids.end(), s.point) !=
                    src_lv.y_ids.end()) {
                    note(at + ": decomposition of '" + y + "' sources Y point '" +
                         s.point + "' at level " + std::to_string(s.level));
                }
                if (!seen_src.insert({s.level, s.point}).second) {
                    note(at + ": decomposition of '" + y + "' repeats source (" +
                         std::to_string(s.level) + ", '" + s.point + "')");
                }
            }
            if (total != lv.n) {
                note(at + ": decomposition of '" + y + "' has size sum " +
                     std::to_string(total) + ", expected " + std::to_string(lv.n));
            }
        }
        for (const std::string& y : lv.y_ids) {
            if (!lv.decomp.count(y))
                note(at + ": Y point '" + y + "' has no decomposition");
        }
    }
    return report;
}

void Presentation::require_valid(const char* module, const char* operation) const {
    const std::vector<std::string> report = validate();
    if (report.empty()) return;
    std::ostringstream os;
    os << report.size() << " violation(s); first: " << report.front();
    throw Error("presentation.invalid", module, operation,
                "operation requires a valid presentation", os.str());
}

std::optional<int> Presentation::nearest_free_point(int i, int pos) const {
    const Level& lv = level(i);
    const Point& from = lv.points[static_cast<size_t>(pos)];
    std::optional<int> best;
    double best_d = 0.0;
    for (int q = 0; q < static_cast<int>(lv.points.size()); ++q) {
        if (q == pos || is_y_pos(i, q)) continue;
        const double d = point_distance(from, lv.points[static_cast<size_t>(q)]);
        if (!best || d < best_d) {
            best = q;
            best_d = d;
        }
    }
    return best;
}

bool same_presentation(const Presentation& a, const Presentation& b) {
    if (&a == &b) return true;
    if (a.num_levels() != b.num_levels()) return false;
    for (int i = 1; i <= a.num_levels(); ++i) {
        const Level& la = a.level(i);
        const Level& lb = b.level(i);
        if (la.n != lb.n || la.points.size() != lb.points.size() ||
            la.y_ids != lb.y_ids)
            return false;
        for (size_t t = 0; t < la.points.size(); ++t) {
            if (la.points[t].id != lb.points[t].id ||
                la.points[t].coord != lb.points[t].coord)
                return false;
        }
        if (la.decomp.size() != lb.decomp.size()) return false;
        for (const auto& [y, srcs] : la.decomp) {
            auto it = lb.decomp.find(y);
            if (it == lb.decomp.end() || it->second.size() != srcs.size()) return false;
            for (size_t t = 0; t < srcs.size(); ++t) {
                if (srcs[t].level != it->second[t].level ||
                    srcs[t].point != it->second[t].point)
                    return false;
            }
        }
    }
    return true;
}

std::vector<SpectrumPoint> enumerate_spectrum(const Presentation& p) {
    std::vector<SpectrumPoint> out;
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        for (int q = 0; q < static_cast<int>(lv.points.size()); ++q) {
            if (!p.is_y_pos(i, q)) out.push_back({i, lv.points[static_cast<size_t>(q)].id});
        }
    }
    return out;
}

std::vector<std::string> compute_bik(const Presentation& p, int i, int k) {
    const Level& lv = p.level(i);
    std::vector<std::string> out;
    if (k <= 0 || k > lv.n) return out;
    for (const Point& pt : lv.points) {
        const std::vector<int> starts = p.block_starts(i, pt.id);
        if (std::find(starts.begin(), starts.end(), k) != starts.end())
            out.push_back(pt.id);
    }
    return out;
}

bool is_open_in_spectrum(const Presentation& p, int i,
                         const std::vector<std::string>& u) {
    std::set<std::string> u_set;
    for (const std::string& id : u) {
        require(p.has_point(i, id), "presentation.unknown-point", "dshcore",
                "is_open_in_spectrum", "the candidate set must lie in X_i",
                "no point '" + id + "' at level " + std::to_string(i));
        require(!p.is_y(i, id), "presentation.not-free", "dshcore",
                "is_open_in_spectrum", "the candidate set must avoid Y_i",
                "point '" + id + "' lies in Y at level " + std::to_string(i));
        u_set.insert(id);
    }
    for (int j = i + 1; j <= p.num_levels(); ++j) {
        for (const auto& [y, srcs] : p.level(j).decomp) {
            for (const Source& s : srcs) {
                if (s.level == i && u_set.count(s.point)) return false;
            }
        }
    }
    return true;
}

Element::Element(PresentationPtr pres, std::vector<std::vector<Mat>> values)
    : pres_(std::move(pres)), values_(std::move(values)) {
    require(pres_ != nullptr, "element.null-presentation", "dshcore", "Element",
            "an element needs a presentation", "got null");
    require(static_cast<int>(values_.size()) == pres_->num_levels(),
            "element.shape", "dshcore", "Element",
            "one value list per level is required",
            "got " + std::to_string(values_.size()) + " lists for " +
                std::to_string(pres_->num_levels()) + " level(s)");
    for (int i = 1; i <= pres_->num_levels(); ++i) {
        const Level& lv = pres_->level(i);
        const auto& vals = values_[static_cast<size_t>(i - 1)];
        require(vals.size() == lv.points.size(), "element.shape", "dshcore",
                "Element", "one matrix per point is required",
                "level " + std::to_string(i) + " has " +
                    std::to_string(lv.points.size()) + " point(s), got " +
                    std::to_string(vals.size()) + " value(s)");
        for (const Mat& m : vals) {
            require(m.rows() == lv.n && m.cols() == lv.n, "element.shape",
                    "dshcore", "Element", "values must be n_i x n_i",
                    "level " + std::to_string(i) + " expects " +
                        std::to_string(lv.n) + "x" + std::to_string(lv.n) +
                        ", got " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
        }
    }
}

const Mat& Element::at(int i, int pos) const {
    pres_->point(i, pos);
    return values_[static_cast<size_t>(i - 1)][static_cast<size_t>(pos)];
}

const Mat& Element::value(int i, const std::string& id) const {
    return at(i, pres_->point_pos(i, id));
}

Element Element::with_value(int i, int pos, Mat m) const {
    pres_->point(i, pos);
    const Level& lv = pres_->level(i);
    require(m.rows() == lv.n && m.cols() == lv.n, "element.shape", "dshcore",
            "with_value", "values must be n_i x n_i",
            "level " + std::to_string(i) + " expects " + std::to_string(lv.n) +
                "x" + std::to_string(lv.n) + ", got " + std::to_string(m.rows()) +
                "x" + std::to_string(m.cols()));
    std::vector<std::vector<Mat>> vals = values_;
    vals[static_cast<size_t>(i - 1)][static_cast<size_t>(pos)] = std::move(m);
    return Element(pres_, std::move(vals));
}

namespace {

/// Assembles the Y-point value of level i at y from already-known free values.
Mat assemble_y_value(const Presentation& p,
                     const std::vector<std::vector<Mat>>& vals, int i,
                     const std::string& y) {
    std::vector<Mat> blocks;
    for (const Source& s : p.sources(i, y)) {
        const int sp = p.point_pos(s.level, s.point);
        blocks.push_back(vals[static_cast<size_t>(s.level - 1)][static_cast<size_t>(sp)]);
    }
    Mat out = direct_sum(blocks);
    require(out.rows() == p.size_at(i), "element.decomposition-size", "dshcore",
            "derive_element", "decomposition blocks must fill the matrix",
            "level " + std::to_string(i) + " point '" + y + "' assembles to size " +
                std::to_string(out.rows()) + ", expected " +
                std::to_string(p.size_at(i)));
    return out;
}

} // namespace

Element derive_element(PresentationPtr p,
                       const std::function<Mat(int, const Point&)>& free_fn) {
    require(p != nullptr, "element.null-presentation", "dshcore",
            "derive_element", "an element needs a presentation", "got null");
    std::vector<std::vector<Mat>> vals(static_cast<size_t>(p->num_levels()));
    // Free values first (sources are always free points, so one pass suffices).
    for (int i = 1; i <= p->num_levels(); ++i) {
        const Level& lv = p->level(i);
        auto& row = vals[static_cast<size_t>(i - 1)];
        row.resize(lv.points.size());
        for (int q = 0; q < static_cast<int>(lv.points.size()); ++q) {
            if (p->is_y_pos(i, q)) continue;
            Mat m = free_fn(i, lv.points[static_cast<size_t>(q)]);
            require(m.rows() == lv.n && m.cols() == lv.n, "element.shape",
                    "dshcore", "derive_element", "free values must be n_i x n_i",
                    "level " + std::to_string(i) + " point '" +
                        lv.points[static_cast<size_t>(q)].id + "' got " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
            row[static_cast<size_t>(q)] = std::move(m);
        }
    }
    for (int i = 1; i <= p->num_levels(); ++i) {
        const Level& lv = p->level(i);
        auto& row = vals[static_cast<size_t>(i - 1)];
        for (int q = 0; q < static_cast<int>(lv.points.size()); ++q) {
            if (!p->is_y_pos(i, q)) continue;
            row[static_cast<size_t>(q)] =
                assemble_y_value(*p, vals, i, lv.points[static_cast<size_t>(q)].id);
        }
    }
    return Element(std::move(p), std::move(vals));
}

Element derive_element(PresentationPtr p, const FreeValueMap& free_values) {
    require(p != nullptr, "element.null-presentation", "dshcore",
            "derive_element", "an element needs a presentation", "got null");
    for (const auto& [key, m] : free_values) {
        (void)m;
        require(p->has_point(key.first, key.second), "presentation.unknown-point",
                "dshcore", "derive_element", "free values must name real points",
                "no point '" + key.second + "' at level " + std::to_string(key.first));
        require(!p->is_y(key.first, key.second), "element.value-at-y", "dshcore",
                "derive_element", "free values are given at free points only",
                "point '" + key.second + "' lies in Y at level " +
                    std::to_string(key.first));
    }
    return derive_element(p, [&free_values](int i, const Point& pt) -> Mat {
        auto it = free_values.find({i, pt.id});
        require(it != free_values.end(), "element.missing-free-value", "dshcore",
                "derive_element", "every free point needs a value",
                "no value for point '" + pt.id + "' at level " + std::to_string(i));
        return it->second;
    });
}

double element_deviation(const Element& f) {
    const Presentation& p = f.pres();
    double worst = 0.0;
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        for (const std::string& y : lv.y_ids) {
            const Mat expected = assemble_y_value(p, f.values(), i, y);
            worst = std::max(worst, max_abs(f.value(i, y) - expected));
        }
    }
    return worst;
}

namespace {

Element pointwise_binary(const Element& a, const Element& b, const char* op,
                         const std::function<Mat(const Mat&, const Mat&)>& fn) {
    require(a.pres_ptr() == b.pres_ptr() || same_presentation(a.pres(), b.pres()),
            "element.presentation-mismatch", "dshcore", op,
            "operands must share a presentation", "structures differ");
    std::vector<std::vector<Mat>> vals(a.values().size());
    for (size_t li = 0; li < vals.size(); ++li) {
        vals[li].reserve(a.values()[li].size());
        for (size_t q = 0; q < a.values()[li].size(); ++q) {
            vals[li].push_back(fn(a.values()[li][q], b.values()[li][q]));
        }
    }
    return Element(a.pres_ptr(), std::move(vals));
}

Element pointwise_unary(const Element& a,
                        const std::function<Mat(const Mat&)>& fn) {
    std::vector<std::vector<Mat>> vals(a.values().size());
    for (size_t li = 0; li < vals.size(); ++li) {
        vals[li].reserve(a.values()[li].size());
        for (const Mat& m : a.values()[li]) vals[li].push_back(fn(m));
    }
    return Element(a.pres_ptr(), std::move(vals));
}

} // namespace

Element add(const Element& a, const Element& b) {
    return pointwise_binary(a, b, "add",
                            [](const Mat& x, const Mat& y) -> Mat { return x + y; });
}

Element subtract(const Element& a, const Element& b) {
    return pointwise_binary(a, b, "subtract",
                            [](const Mat& x, const Mat& y) -> Mat { return x - y; });
}

Element multiply(const Element& a, const Element& b) {
    return pointwise_binary(a, b, "multiply",
                            [](const Mat& x, const Mat& y) -> Mat { return x * y; });
}

Element adjoint(const Element& a) {
    return pointwise_unary(a, [](const Mat& m) -> Mat { return m.adjoint(); });
}

Element scale(Cplx lambda, const Element& a) {
    return pointwise_unary(a, [lambda](const Mat& m) -> Mat { return lambda * m; });
}

Element unit_element(PresentationPtr p) {
    return derive_element(p, [&p](int i, const Point&) -> Mat {
        return Mat::Identity(p->size_at(i), p->size_at(i));
    });
}

Element zero_element(PresentationPtr p) {
    return derive_element(p, [&p](int i, const Point&) -> Mat {
        return Mat::Zero(p->size_at(i), p->size_at(i));
    });
}

double element_norm(const Element& f) {
    double worst = 0.0;
    for (const auto& row : f.values()) {
        for (const Mat& m : row) worst = std::max(worst, op_norm(m));
    }
    return worst;
}

bool is_invertible_element(const Element& f, const Tolerances& tol) {
    const Presentation& p = f.pres();
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        for (int q = 0; q < static_cast<int>(lv.points.size()); ++q) {
            if (p.is_y_pos(i, q)) continue;
            if (singular_floor(f.at(i, q)) <= tol.tau_sing) return false;
        }
    }
    return true;
}

Element invert_element(const Element& f, const Tolerances& tol) {
    require(is_invertible_element(f, tol), "element.not-invertible", "dshcore",
            "invert_element", "pointwise inversion needs an invertible element",
            "some evaluation has smallest singular value at or below tau_sing");
    const PresentationPtr p = f.pres_ptr();
    return derive_element(p, [&f](int i, const Point& pt) -> Mat {
        return f.value(i, pt.id).inverse();
    });
}

} // namespace dsh
