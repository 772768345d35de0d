/* dshctl — command-line driver for the DSH toolkit.
 *
 * Subcommands:
 *   validate     structural validation of any JSON artifact
 *   eval         norms, deviation, bandwidth, and invertibility of an element
 *   pipeline     run the approximation pipeline on a chain, emit certificate
 *   dynamics     return partitions and the inclusion chain of a rotation
 *   lemma-check  seeded law suites with a machine-readable bundle report
 *   schemas      print the versioned file-format descriptions
 *
 * Exit codes: 0 all checks pass, 1 check failure, 2 schema/input violation.
 * Reports are byte-deterministic for a fixed configuration; wall time goes
 * to stderr so it never perturbs report bytes.
 */
#include "dsh/json_io.hpp"
#include "dsh/suites.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>
#include <string>

namespace {

using dsh::Json;

/// Options shared by every subcommand.
struct Common {
    dsh::Tolerances tol;
    std::uint64_t seed = 42;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--tau-zero", c.tol.tau_zero, "entry modulus treated as exact zero");
    cmd->add_option("--tau-sing", c.tol.tau_sing, "singular-value floor for invertibility");
    cmd->add_option("--tau-eq", c.tol.tau_eq, "tolerance for structural equality checks");
    cmd->add_option("--seed", c.seed, "seed for randomized suites");
    cmd->add_option("--out", c.out, "report file (stdout when omitted)");
}

/// Writes the report and returns the exit status implied by `pass`.
int emit(const Common& c, const Json& report, bool pass) {
    if (c.out.empty())
        std::cout << dsh::canonical_dump(report);
    else
        dsh::save_json_file(c.out, report);
    return pass ? 0 : 1;
}

std::string schema_of(const Json& j) {
    const auto it = j.find("schema");
    if (it == j.end() || !it->is_string())
        throw dsh::Error("io.schema-version", "cli", "dispatch",
                         "input carries a string 'schema' tag");
    return it->get<std::string>();
}

// --- validate ---------------------------------------------------------------

int cmd_validate(const Common& c, const std::string& path,
                 const std::string& pres_path) {
    const Json j = dsh::load_json_file(path);
    const std::string kind = schema_of(j);
    Json report{{"schema", "validate-report-v1"},
                {"input", path},
                {"kind", kind},
                {"violations", Json::array()},
                {"pass", true}};
    try {
        if (kind == "dsh-presentation-v1") {
            const auto p = dsh::presentation_from_json(j);
            report["levels"] = p->num_levels();
            report["min_size"] = p->min_size();
            report["max_size"] = p->max_size();
        } else if (kind == "dsh-element-v1") {
            if (pres_path.empty())
                throw dsh::Error("io.format", "cli", "validate",
                                 "elements need --presentation <file>");
            const auto p = dsh::presentation_from_json(dsh::load_json_file(pres_path));
            const dsh::Element f = dsh::element_from_json(j, p);
            report["deviation"] = dsh::element_deviation(f);
            if (dsh::element_deviation(f) > c.tol.tau_eq)
                throw dsh::Error("element.deviation", "cli", "validate",
                                 "block-diagonal constraints hold at glued points");
        } else if (kind == "dsh-chain-v1") {
            const dsh::Chain ch = dsh::chain_from_json(j);
            report["algebras"] = static_cast<int>(ch.algebras.size());
        } else if (kind == "rotation-system-v1") {
            const auto sys = dsh::system_from_json(j);
            report["arcs"] = static_cast<int>(sys.arcs.size());
        } else if (kind == "dsh-map-v1") {
            // a map file references its endpoint presentations by hash only;
            // validate the embedded structure by round-tripping via a chain
            throw dsh::Error("io.format", "cli", "validate",
                             "standalone map files need their presentations; "
                             "validate the enclosing dsh-chain-v1 instead");
        } else {
            throw dsh::Error("io.schema-version", "cli", "validate",
                             "known schema tag", kind);
        }
    } catch (const dsh::Error& e) {
        if (e.code().rfind("io.", 0) == 0) throw; // malformed input: exit 2
        report["violations"].push_back(e.what());
        report["pass"] = false;
    }
    return emit(c, report, report["pass"].get<bool>());
}

// --- eval -------------------------------------------------------------------

int cmd_eval(const Common& c, const std::string& path, const std::string& pres_path) {
    const auto p = dsh::presentation_from_json(dsh::load_json_file(pres_path));
    const dsh::Element f = dsh::element_from_json(dsh::load_json_file(path), p);
    int bw = 0;
    double floor = 1e300;
    for (int i = 1; i <= p->num_levels(); ++i)
        for (int pos = 0; pos < static_cast<int>(p->level(i).points.size()); ++pos) {
            bw = std::max(bw, dsh::bandwidth(f.at(i, pos), c.tol));
            floor = std::min(floor, dsh::singular_floor(f.at(i, pos)));
        }
    const double dev = dsh::element_deviation(f);
    const Json report{{"schema", "eval-report-v1"},
                      {"input", path},
                      {"norm", dsh::element_norm(f)},
                      {"deviation", dev},
                      {"max_bandwidth", bw},
                      {"singular_floor", floor},
                      {"invertible", dsh::is_invertible_element(f, c.tol)},
                      {"pass", dev <= c.tol.tau_eq}};
    return emit(c, report, dev <= c.tol.tau_eq);
}

// --- pipeline -----------------------------------------------------------------

int cmd_pipeline(const Common& c, const std::string& chain_path,
                 const std::string& input_path, double eps, int level, int grid,
                 bool emit_elements) {
    dsh::Chain chain;
    if (chain_path.empty()) {
        chain = dsh::injectivize_chain(dsh::build_chain(dsh::fibonacci_system(), grid));
    } else {
        chain = dsh::chain_from_json(dsh::load_json_file(chain_path));
    }
    dsh::require(level >= 1 && level <= static_cast<int>(chain.algebras.size()),
                 "io.format", "cli", "pipeline", "--level within the chain");

    const auto p = chain.algebras[static_cast<std::size_t>(level) - 1];
    std::optional<dsh::Element> input;
    if (input_path.empty()) {
        input = dsh::seeded_noninvertible(dsh::fibonacci_system(), level - 1, p, c.seed);
    } else {
        input = dsh::element_from_json(dsh::load_json_file(input_path), p);
    }

    const auto cert = dsh::approximate_invertible(chain, level, *input, eps, c.tol);
    const bool pass = cert.total_distance <= eps && cert.floor > c.tol.tau_sing;
    return emit(c, dsh::certificate_to_json(cert, emit_elements), pass);
}

// --- dynamics -------------------------------------------------------------------

int cmd_dynamics(const Common& c, const std::string& alpha_text,
                 const std::string& arcs_path, int grid,
                 const std::string& emit_chain_path) {
    dsh::RotationSystem sys = dsh::fibonacci_system();
    if (!alpha_text.empty()) sys.alpha = dsh::rat_from_string(alpha_text);
    if (!arcs_path.empty()) {
        const Json j = dsh::load_json_file(arcs_path);
        if (j.is_object() && j.contains("schema")) {
            const auto parsed = dsh::system_from_json(j);
            sys.arcs = parsed.arcs;
            if (alpha_text.empty()) sys.alpha = parsed.alpha;
        } else if (j.is_array()) {
            sys.arcs.clear();
            for (const auto& ja : j)
                sys.arcs.push_back(dsh::Arc{dsh::rat_from_string(ja.at("lo").get<std::string>()),
                                            dsh::rat_from_string(ja.at("hi").get<std::string>())});
        } else {
            throw dsh::Error("io.format", "cli", "dynamics",
                             "--arcs file is rotation-system-v1 or an [{lo,hi}] array");
        }
    }
    const auto bad = dsh::validate_system(sys);
    if (!bad.empty())
        throw dsh::Error("io.format", "cli", "dynamics", "rotation system validates",
                         bad.front());

    Json parts = Json::array();
    bool pass = true;
    for (std::size_t s = 0; s < sys.arcs.size(); ++s) {
        const auto part = dsh::return_partition(sys, static_cast<int>(s));
        dsh::Rat mass(0);
        Json levels = Json::array();
        for (const auto& lvl : part.levels) {
            dsh::Rat len(0);
            Json ivs = Json::array();
            for (const auto& iv : lvl.intervals) {
                len += iv.hi - iv.lo;
                ivs.push_back(Json{{"lo", dsh::rat_to_string(iv.lo)},
                                   {"hi", dsh::rat_to_string(iv.hi)}});
            }
            mass += dsh::Rat(lvl.n) * len;
            Json ys = Json::array();
            for (const auto& y : lvl.y_points) ys.push_back(dsh::rat_to_string(y));
            levels.push_back(Json{{"time", lvl.n},
                                  {"intervals", std::move(ivs)},
                                  {"y_points", std::move(ys)}});
        }
        const bool tiles = mass == dsh::Rat(1);
        pass = pass && tiles;
        parts.push_back(Json{{"arc",
                              Json{{"lo", dsh::rat_to_string(sys.arcs[s].lo)},
                                   {"hi", dsh::rat_to_string(sys.arcs[s].hi)}}},
                             {"levels", std::move(levels)},
                             {"tiling_exact", tiles}});
    }

    Json report{{"schema", "dynamics-report-v1"},
                {"alpha", dsh::rat_to_string(sys.alpha)},
                {"partitions", std::move(parts)},
                {"pass", pass}};
    if (sys.arcs.size() >= 2) {
        const dsh::Chain chain = dsh::build_chain(sys, grid);
        const auto chain_bad = dsh::validate_chain(chain);
        report["chain_valid"] = chain_bad.empty();
        Json sizes = Json::array();
        for (const auto& alg : chain.algebras) sizes.push_back(alg->min_size());
        report["chain_min_sizes"] = std::move(sizes);
        pass = pass && chain_bad.empty();
        report["pass"] = pass;
        if (!emit_chain_path.empty())
            dsh::save_json_file(emit_chain_path, dsh::chain_to_json(chain));
    }
    return emit(c, report, pass);
}

// --- lemma-check ------------------------------------------------------------------

int cmd_lemma_check(const Common& c, const std::string& suite) {
    std::vector<dsh::SuiteReport> reports;
    if (suite == "all") {
        reports = dsh::run_all_suites(c.seed, c.tol);
    } else if (suite == "paths") {
        reports.push_back(dsh::run_path_suite(c.seed, 200, c.tol));
    } else if (suite == "crosses") {
        reports.push_back(dsh::run_cross_suite(c.seed, 500, c.tol));
    } else if (suite == "indicators") {
        reports.push_back(dsh::run_indicator_suite(c.seed, 20, c.tol));
    } else if (suite == "quotients") {
        reports.push_back(dsh::run_quotient_suite(c.seed, 10, c.tol));
    } else if (suite == "dynamics") {
        reports.push_back(dsh::run_dynamics_suite(c.tol));
    } else if (suite == "pipeline") {
        reports.push_back(dsh::run_pipeline_suite(c.seed, 5, c.tol));
    } else {
        throw dsh::Error("io.format", "cli", "lemma-check",
                         "--suite in {all, paths, crosses, indicators, quotients, "
                         "dynamics, pipeline}",
                         suite);
    }
    bool pass = true;
    for (const auto& r : reports) pass = pass && r.pass;
    return emit(c, dsh::reports_to_json(reports, c.seed, c.tol), pass);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DSH algebra toolkit"};
    app.require_subcommand(1);

    Common common;

    std::string in_path, pres_path;
    auto* validate = app.add_subcommand("validate", "validate a JSON artifact");
    validate->add_option("input", in_path, "artifact file")->required();
    validate->add_option("--presentation", pres_path, "presentation file for elements");
    add_common(validate, common);

    std::string eval_path, eval_pres;
    auto* eval = app.add_subcommand("eval", "report norms and probes of an element");
    eval->add_option("input", eval_path, "dsh-element-v1 file")->required();
    eval->add_option("--presentation", eval_pres, "dsh-presentation-v1 file")->required();
    add_common(eval, common);

    std::string chain_path, input_path;
    double eps = 0.5;
    int level = 1, grid = 6;
    bool emit_elements = false;
    auto* pipeline = app.add_subcommand("pipeline", "run the approximation pipeline");
    pipeline->add_option("--chain", chain_path, "dsh-chain-v1 file (default: rotation chain)");
    pipeline->add_option("--input", input_path, "dsh-element-v1 input (default: seeded)");
    pipeline->add_option("--eps", eps, "approximation budget")->required();
    pipeline->add_option("--level", level, "chain level of the input");
    pipeline->add_option("--grid", grid, "interior samples per subinterval");
    pipeline->add_flag("--emit-elements", emit_elements, "embed elements in the certificate");
    add_common(pipeline, common);

    std::string alpha_text, arcs_path, emit_chain_path;
    int dyn_grid = 6;
    auto* dynamics = app.add_subcommand("dynamics", "return partitions and inclusion chain");
    dynamics->add_option("--alpha", alpha_text, "rotation angle num/den");
    dynamics->add_option("--arcs", arcs_path, "arcs file (rotation-system-v1 or [{lo,hi}])");
    dynamics->add_option("--grid", dyn_grid, "interior samples per subinterval");
    dynamics->add_option("--emit-chain", emit_chain_path, "write the built chain here");
    add_common(dynamics, common);

    std::string suite = "all";
    auto* lemma = app.add_subcommand("lemma-check", "run the seeded law suites");
    lemma->add_option("--suite", suite, "all|paths|crosses|indicators|quotients|dynamics|pipeline");
    add_common(lemma, common);

    auto* schemas = app.add_subcommand("schemas", "print the file-format bundle");
    add_common(schemas, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // malformed invocation is a schema violation
    }

    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        if (validate->parsed()) rc = cmd_validate(common, in_path, pres_path);
        else if (eval->parsed()) rc = cmd_eval(common, eval_path, eval_pres);
        else if (pipeline->parsed())
            rc = cmd_pipeline(common, chain_path, input_path, eps, level, grid, emit_elements);
        else if (dynamics->parsed())
            rc = cmd_dynamics(common, alpha_text, arcs_path, dyn_grid, emit_chain_path);
        else if (lemma->parsed()) rc = cmd_lemma_check(common, suite);
        else if (schemas->parsed()) rc = emit(common, dsh::schema_bundle(), true);
    } catch (const dsh::Error& e) {
        std::cerr << e.what() << "\n";
        rc = e.code().rfind("io.", 0) == 0 ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        rc = 1;
    }
    const auto t1 = std::chrono::steady_clock::now();
    std::cerr << "wall_ms="
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
              << "\n";
    return rc;
}
