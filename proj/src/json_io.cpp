/* src/json_io.cpp — canonical JSON serialization for all file formats. */
#include "dsh/json_io.hpp"

#include "dsh/errors.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <utility>

namespace dsh {

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void fail(const char* code, const char* operation,
                       const char* invariant, const std::string& detail = {}) {
    throw Error(code, kModule, operation, invariant, detail);
}

std::string point_key(int level, const std::string& id) {
    return std::to_string(level) + "." + id;
}

std::pair<int, std::string> split_point_key(const std::string& key,
                                            const char* operation) {
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
        fail("io.format", operation, "point keys look like 'level.point'", key);
    int level = 0;
    try {
        level = std::stoi(key.substr(0, dot));
    } catch (const std::exception&) {
        fail("io.format", operation, "point keys start with a level number", key);
    }
    return {level, key.substr(dot + 1)};
}

const Json& member(const Json& j, const char* name, const char* operation) {
    const auto it = j.find(name);
    if (it == j.end())
        fail("io.format", operation, "required member present", name);
    return *it;
}

/// Rationals serialize as strings; integers are accepted on input.
Json rat_to_json(const Rat& x) { return Json(rat_to_string(x)); }

Rat rat_from_json(const Json& j, const char* operation) {
    if (j.is_number_integer()) return Rat(j.get<long long>());
    if (j.is_string()) return rat_from_string(j.get<std::string>());
    fail("io.format", operation, "rationals are strings like '377/610'", j.dump());
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

} // namespace

Json matrix_to_json(const Mat& m) {
    Json re = Json::array(), im = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json re_row = Json::array(), im_row = Json::array();
        for (int c = 0; c < m.cols(); ++c) {
            re_row.push_back(m(r, c).real());
            im_row.push_back(m(r, c).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()},
                {"re", std::move(re)}, {"im", std::move(im)}};
}

Mat matrix_from_json(const Json& j) {
    const char* op = "matrix_from_json";
    const int rows = member(j, "rows", op).get<int>();
    const int cols = member(j, "cols", op).get<int>();
    if (rows < 0 || cols < 0)
        fail("io.format", op, "matrix dimensions are non-negative");
    const Json& re = member(j, "re", op);
    const Json& im = member(j, "im", op);
    if (static_cast<int>(re.size()) != rows || static_cast<int>(im.size()) != rows)
        fail("io.format", op, "row arrays match the declared row count");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const Json& re_row = re[static_cast<std::size_t>(r)];
        const Json& im_row = im[static_cast<std::size_t>(r)];
        if (static_cast<int>(re_row.size()) != cols ||
            static_cast<int>(im_row.size()) != cols)
            fail("io.format", op, "column arrays match the declared column count");
        for (int c = 0; c < cols; ++c)
            m(r, c) = Cplx(re_row[static_cast<std::size_t>(c)].get<double>(),
                           im_row[static_cast<std::size_t>(c)].get<double>());
    }
    return m;
}

Json presentation_to_json(const Presentation& p) {
    Json levels = Json::array();
    Json decomp = Json::array();
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        Json points = Json::array();
        for (const Point& pt : lv.points)
            points.push_back(Json{{"id", pt.id}, {"coord", pt.coord}});
        levels.push_back(Json{{"n", lv.n},
                              {"points", std::move(points)},
                              {"y", lv.y_ids}});
        for (const auto& [y_id, srcs] : lv.decomp) {
            Json sources = Json::array();
            for (const Source& s : srcs)
                sources.push_back(Json{{"level", s.level}, {"point", s.point}});
            decomp.push_back(Json{{"level", i}, {"y", y_id},
                                  {"sources", std::move(sources)}});
        }
    }
    return Json{{"schema", "dsh-presentation-v1"},
                {"levels", std::move(levels)},
                {"decomp", std::move(decomp)}};
}

PresentationPtr presentation_from_json(const Json& j) {
    const char* op = "presentation_from_json";
    require_schema(j, "dsh-presentation-v1", op);
    std::vector<Level> levels;
    for (const Json& jl : member(j, "levels", op)) {
        Level lv;
        lv.n = member(jl, "n", op).get<int>();
        for (const Json& jp : member(jl, "points", op)) {
            Point pt;
            pt.id = member(jp, "id", op).get<std::string>();
            pt.coord = member(jp, "coord", op).get<std::vector<double>>();
            lv.points.push_back(std::move(pt));
        }
        lv.y_ids = member(jl, "y", op).get<std::vector<std::string>>();
        levels.push_back(std::move(lv));
    }
    for (const Json& jd : member(j, "decomp", op)) {
        const int level = member(jd, "level", op).get<int>();
        if (level < 1 || level > static_cast<int>(levels.size()))
            fail("io.format", op, "decomposition level indices in range",
                 std::to_string(level));
        std::vector<Source> srcs;
        for (const Json& js : member(jd, "sources", op))
            srcs.push_back(Source{member(js, "level", op).get<int>(),
                                  member(js, "point", op).get<std::string>()});
        levels[static_cast<std::size_t>(level - 1)]
            .decomp[member(jd, "y", op).get<std::string>()] = std::move(srcs);
    }
    auto p = std::make_shared<Presentation>(std::move(levels));
    p->require_valid(kModule, op);
    return p;
}

std::string presentation_hash(const Presentation& p) {
    return hex64(fnv1a64(canonical_dump(presentation_to_json(p))));
}

Json element_to_json(const Element& f) {
    const Presentation& p = f.pres();
    Json values = Json::object();
    for (int i = 1; i <= p.num_levels(); ++i) {
        const Level& lv = p.level(i);
        for (int pos = 0; pos < static_cast<int>(lv.points.size()); ++pos)
            values[point_key(i, lv.points[static_cast<std::size_t>(pos)].id)] =
                matrix_to_json(f.at(i, pos));
    }
    return Json{{"schema", "dsh-element-v1"},
                {"presentation", presentation_hash(p)},
                {"values", std::move(values)}};
}

Element element_from_json(const Json& j, PresentationPtr p) {
    const char* op = "element_from_json";
    require_schema(j, "dsh-element-v1", op);
    const std::string want = presentation_hash(*p);
    const std::string got = member(j, "presentation", op).get<std::string>();
    if (got != want)
        fail("io.hash-mismatch", op,
             "element's presentation hash matches the supplied presentation",
             got + " vs " + want);
    std::vector<std::vector<Mat>> values(p->levels().size());
    for (int i = 1; i <= p->num_levels(); ++i)
        values[static_cast<std::size_t>(i - 1)]
            .resize(p->level(i).points.size(), Mat());
    const Json& jv = member(j, "values", op);
    std::size_t seen = 0;
    for (auto it = jv.begin(); it != jv.end(); ++it) {
        const auto [level, id] = split_point_key(it.key(), op);
        if (level < 1 || level > p->num_levels() || !p->has_point(level, id))
            fail("io.format", op, "value keys name points of the presentation",
                 it.key());
        values[static_cast<std::size_t>(level - 1)]
              [static_cast<std::size_t>(p->point_pos(level, id))] =
            matrix_from_json(it.value());
        ++seen;
    }
    std::size_t expected = 0;
    for (const Level& lv : p->levels()) expected += lv.points.size();
    if (seen != expected)
        fail("io.format", op, "one value per presentation point",
             std::to_string(seen) + " vs " + std::to_string(expected));
    return Element(std::move(p), std::move(values));
}

Json map_to_json(const DiagonalMap& m) {
    Json table = Json::object();
    for (int i = 1; i <= m.target->num_levels(); ++i) {
        const Level& lv = m.target->level(i);
        for (int pos = 0; pos < static_cast<int>(lv.points.size()); ++pos) {
            Json sources = Json::array();
            for (const Source& s :
                 m.table[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(pos)])
                sources.push_back(Json{{"level", s.level}, {"point", s.point}});
            table[point_key(i, lv.points[static_cast<std::size_t>(pos)].id)] =
                std::move(sources);
        }
    }
    return Json{{"schema", "dsh-map-v1"},
                {"source", presentation_hash(*m.source)},
                {"target", presentation_hash(*m.target)},
                {"table", std::move(table)}};
}

DiagonalMap map_from_json(const Json& j, PresentationPtr source,
                          PresentationPtr target) {
    const char* op = "map_from_json";
    require_schema(j, "dsh-map-v1", op);
    const std::string src_hash = presentation_hash(*source);
    const std::string tgt_hash = presentation_hash(*target);
    if (member(j, "source", op).get<std::string>() != src_hash ||
        member(j, "target", op).get<std::string>() != tgt_hash)
        fail("io.hash-mismatch", op,
             "map's presentation hashes match the supplied presentations");
    DiagonalMap m;
    m.source = std::move(source);
    m.target = std::move(target);
    m.table.resize(m.target->levels().size());
    for (int i = 1; i <= m.target->num_levels(); ++i)
        m.table[static_cast<std::size_t>(i - 1)]
            .resize(m.target->level(i).points.size());
    const Json& jt = member(j, "table", op);
    for (auto it = jt.begin(); it != jt.end(); ++it) {
        const auto [level, id] = split_point_key(it.key(), op);
        if (level < 1 || level > m.target->num_levels() ||
            !m.target->has_point(level, id))
            fail("io.format", op, "table keys name points of the target", it.key());
        std::vector<Source> srcs;
        for (const Json& js : it.value())
            srcs.push_back(Source{member(js, "level", op).get<int>(),
                                  member(js, "point", op).get<std::string>()});
        m.table[static_cast<std::size_t>(level - 1)]
               [static_cast<std::size_t>(m.target->point_pos(level, id))] =
            std::move(srcs);
    }
    const auto bad = validate_map(m);
    if (!bad.empty()) fail("io.format", op, "map must validate", bad.front());
    return m;
}

Json chain_to_json(const Chain& c) {
    Json presentations = Json::array();
    for (const PresentationPtr& p : c.algebras)
        presentations.push_back(presentation_to_json(*p));
    Json maps = Json::array();
    for (const DiagonalMap& m : c.maps) maps.push_back(map_to_json(m));
    return Json{{"schema", "dsh-chain-v1"},
                {"presentations", std::move(presentations)},
                {"maps", std::move(maps)}};
}

Chain chain_from_json(const Json& j) {
    const char* op = "chain_from_json";
    require_schema(j, "dsh-chain-v1", op);
    Chain c;
    for (const Json& jp : member(j, "presentations", op))
        c.algebras.push_back(presentation_from_json(jp));
    const Json& jm = member(j, "maps", op);
    if (jm.size() + 1 != c.algebras.size())
        fail("io.format", op, "one map between each adjacent presentation pair",
             std::to_string(jm.size()) + " maps for " +
                 std::to_string(c.algebras.size()) + " presentations");
    for (std::size_t t = 0; t < jm.size(); ++t)
        c.maps.push_back(map_from_json(jm[t], c.algebras[t], c.algebras[t + 1]));
    const auto bad = validate_chain(c);
    if (!bad.empty()) fail("io.format", op, "chain must validate", bad.front());
    return c;
}

Json system_to_json(const RotationSystem& sys) {
    Json arcs = Json::array();
    for (const Arc& a : sys.arcs)
        arcs.push_back(Json{{"lo", rat_to_json(a.lo)}, {"hi", rat_to_json(a.hi)}});
    return Json{{"schema", "rotation-system-v1"},
                {"alpha",
                 Json{{"num", numerator(sys.alpha).str()},
                      {"den", denominator(sys.alpha).str()}}},
                {"arcs", std::move(arcs)}};
}

RotationSystem system_from_json(const Json& j) {
    const char* op = "system_from_json";
    require_schema(j, "rotation-system-v1", op);
    RotationSystem sys;
    const Json& ja = member(j, "alpha", op);
    const Rat num = rat_from_json(member(ja, "num", op), op);
    const Rat den = rat_from_json(member(ja, "den", op), op);
    if (den == 0) fail("io.format", op, "alpha's denominator is nonzero");
    sys.alpha = num / den;
    for (const Json& jarc : member(j, "arcs", op))
        sys.arcs.push_back(Arc{rat_from_json(member(jarc, "lo", op), op),
                               rat_from_json(member(jarc, "hi", op), op)});
    const auto bad = validate_system(sys);
    if (!bad.empty()) fail("io.format", op, "rotation system must validate",
                           bad.front());
    return sys;
}

Json certificate_to_json(const PipelineCertificate& cert,
                         bool include_elements) {
    Json stages = Json::array();
    for (const StageRecord& st : cert.stages)
        stages.push_back(Json{{"stage", st.stage}, {"distance", st.distance}});
    Json u_set = Json::array();
    for (const SpectrumPoint& sp : cert.u_set)
        u_set.push_back(Json{{"level", sp.level}, {"point", sp.point}});
    Json out{{"schema", "pipeline-cert-v1"},
             {"already_invertible", cert.already_invertible},
             {"route", cert.route},
             {"j", cert.j},
             {"j_prime", cert.j_prime},
             {"m", cert.m},
             {"n_crosses", cert.n_crosses},
             {"epsilon", cert.epsilon},
             {"stages", std::move(stages)},
             {"total_distance", cert.total_distance},
             {"floor", cert.floor},
             {"nilpotent_residual", cert.nilpotent_residual},
             {"max_unitary_defect", cert.max_unitary_defect},
             {"bandwidth_after_widen", cert.bandwidth_after_widen},
             {"bandwidth_after_block", cert.bandwidth_after_block},
             {"bandwidth_after_shift", cert.bandwidth_after_shift},
             {"u_set", std::move(u_set)}};
    if (include_elements && cert.a_prime.has_value())
        out["a_prime"] = element_to_json(*cert.a_prime);
    if (include_elements && cert.nilpotent.has_value())
        out["nilpotent"] = element_to_json(*cert.nilpotent);
    return out;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io.read", "load_json_file", "input file must open", path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        fail("io.parse", "load_json_file", "input file must parse as JSON",
             path + ": " + e.what());
    }
    return j;
}

void save_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) fail("io.write", "save_json_file", "output file must open", path);
    out << canonical_dump(j);
    if (!out) fail("io.write", "save_json_file", "output file must write", path);
}

void require_schema(const Json& j, const char* expected, const char* operation) {
    const auto it = j.find("schema");
    if (it == j.end() || !it->is_string() || it->get<std::string>() != expected)
        throw Error("io.schema-version", kModule, operation,
                    std::string("input must carry schema tag '") + expected + "'",
                    it == j.end() ? std::string("missing")
                                  : it->dump());
}

Json schema_bundle() {
    return Json{
        {"dsh-presentation-v1",
         "levels:[{n, points:[{id, coord:[...]}], y:[ids]}], "
         "decomp:[{level, y, sources:[{level, point}]}]"},
        {"dsh-element-v1",
         "presentation:<hash>, values:{'level.point': {rows, cols, re, im}}"},
        {"dsh-map-v1",
         "source:<hash>, target:<hash>, "
         "table:{'level.point': [{level, point}, ...]}"},
        {"dsh-chain-v1", "presentations:[...], maps:[...] in chain order"},
        {"rotation-system-v1",
         "alpha:{num, den}, arcs:[{lo, hi}] with rationals as strings"},
        {"pipeline-cert-v1",
         "route, stage ledger, recomputed distances, floors and bandwidths"}};
}

} // namespace dsh
