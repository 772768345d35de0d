// Acceptance gate: the seven release criteria, one pass/fail line each.
//
//   1. unitary path identities      200 draws per law, under 10 s
//   2. cross steering and bandwidth 500 planted draws, exact integers, under 20 s
//   3. marker element semantics     20 presentations, exhaustive, under 20 s
//   4. quotients and the collapse   10 presentations, 50 draws, under 15 s
//   5. rotation dynamics            exact oracle values, under 15 s
//   6. approximation pipeline       5 seeds x two budgets, under 60 s
//   7. seeded determinism           identical seeds give identical report bytes
//
// Exit status 0 iff every criterion passes.
#include "dsh/suites.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace {

struct Criterion {
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    double cap = 0.0;          // 0 = uncapped
    std::string note;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string failing_laws(const dsh::SuiteReport& r) {
    std::string out;
    for (const auto& law : r.laws) {
        if (law.pass) continue;
        if (!out.empty()) out += ", ";
        out += law.law + " (measured " + std::to_string(law.measured) +
               " vs bound " + std::to_string(law.bound) + ")";
    }
    return out;
}

Criterion run_suite_criterion(const std::string& name, double cap,
                              const std::function<dsh::SuiteReport()>& body) {
    Criterion c;
    c.name = name;
    c.cap = cap;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const dsh::SuiteReport r = body();
        c.seconds = seconds_since(t0);
        c.passed = r.pass && (cap <= 0.0 || c.seconds < cap);
        if (!r.pass) c.note = failing_laws(r);
        else if (!c.passed) c.note = "over the time cap";
    } catch (const std::exception& e) {
        c.seconds = seconds_since(t0);
        c.passed = false;
        c.note = e.what();
    }
    return c;
}

} // namespace

int main() {
    const std::uint64_t seed = 1729;
    const dsh::Tolerances tol;
    std::vector<Criterion> cs;

    // Seed offsets match run_all_suites so criterion 7 can compare bytes.
    std::vector<dsh::SuiteReport> first;
    cs.push_back(run_suite_criterion("unitary path identities", 10.0, [&] {
        first.push_back(dsh::run_path_suite(seed, 200, tol));
        return first.back();
    }));
    cs.push_back(run_suite_criterion("cross steering and bandwidth", 20.0, [&] {
        first.push_back(dsh::run_cross_suite(seed + 1, 500, tol));
        return first.back();
    }));
    cs.push_back(run_suite_criterion("marker element semantics", 20.0, [&] {
        first.push_back(dsh::run_indicator_suite(seed + 2, 20, tol));
        return first.back();
    }));
    cs.push_back(run_suite_criterion("quotients and the collapse", 15.0, [&] {
        first.push_back(dsh::run_quotient_suite(seed + 3, 10, tol));
        return first.back();
    }));
    cs.push_back(run_suite_criterion("rotation dynamics", 15.0, [&] {
        first.push_back(dsh::run_dynamics_suite(tol));
        return first.back();
    }));
    cs.push_back(run_suite_criterion("approximation pipeline", 60.0, [&] {
        first.push_back(dsh::run_pipeline_suite(seed + 5, 5, tol));
        return first.back();
    }));

    {
        Criterion c;
        c.name = "seeded determinism";
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const std::string once =
                dsh::canonical_dump(dsh::reports_to_json(first, seed, tol));
            const std::string twice = dsh::canonical_dump(
                dsh::reports_to_json(dsh::run_all_suites(seed, tol), seed, tol));
            c.passed = (first.size() == 6) && (once == twice);
            if (!c.passed) c.note = "report bytes differ between identical runs";
        } catch (const std::exception& e) {
            c.passed = false;
            c.note = e.what();
        }
        c.seconds = seconds_since(t0);
        cs.push_back(c);
    }

    bool all = true;
    for (std::size_t k = 0; k < cs.size(); ++k) {
        const Criterion& c = cs[k];
        all = all && c.passed;
        std::printf("criterion %zu  %-32s %s  %6.2fs", k + 1, c.name.c_str(),
                    c.passed ? "PASS" : "FAIL", c.seconds);
        if (c.cap > 0.0) std::printf(" (cap %.0fs)", c.cap);
        if (!c.note.empty()) std::printf("  -- %s", c.note.c_str());
        std::printf("\n");
    }
    std::printf("overall: %s\n", all ? "PASS" : "FAIL");
    return all ? 0 : 1;
}
