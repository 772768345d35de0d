/* dsh/suites.hpp — seeded law batteries with machine-readable reports.
 *
 * Each suite draws seeded random instances, checks a fixed family of laws,
 * and aggregates one result per law: the worst measured deviation across all
 * draws against the law's bound (for exact integer or boolean laws the
 * measurement is a failure count against a bound of zero).  Reports are pure
 * functions of (seed, tolerances): serializing the same report twice yields
 * identical bytes, which the determinism checks rely on.
 *
 * The suites are shared by the command-line driver's lemma-check command and
 * by the standalone acceptance binary, so both observe the same laws at the
 * same pinned sizes.
 */
#pragma once

#include "dsh/json_io.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dsh {

/// @brief One aggregated law check.
struct LawResult {
    std::string law;        // stable identifier, e.g. "path.window-reindex"
    bool pass = false;
    double measured = 0.0;  // worst deviation across draws (or failure count)
    double bound = 0.0;
    int draws = 0;
    std::string note;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<LawResult> laws;
    bool pass = false;      // conjunction over laws
};

/// @brief Unitary-path identities: window reindexing, prefix splitting, and
/// the block decomposition of the shift family (draws with n <= 24, N <= 4).
SuiteReport run_path_suite(std::uint64_t seed, int draws,
                           const Tolerances& tol = {});

/// @brief Cross preservation and bandwidth growth under the elementary
/// paths, the cycle paths, and the cross mover (planted matrices, n <= 20,
/// parameters sampled on 33-point grids; bandwidths compared exactly).
SuiteReport run_cross_suite(std::uint64_t seed, int draws,
                            const Tolerances& tol = {});

/// @brief Marker elements on random valid presentations: window shape, the
/// start-set characterization as an iff, vanishing on forbidden sets, and
/// certificate coverage.
SuiteReport run_indicator_suite(std::uint64_t seed, int count,
                                const Tolerances& tol = {});

/// @brief Quotients restrict elements with zero deviation; the homogeneous
/// collapse is norm-preserving, multiplicative, and invertible.
SuiteReport run_quotient_suite(std::uint64_t seed, int count,
                               const Tolerances& tol = {});

/// @brief The rotation 377/610 with arc [0,1/8]: return classes against a
/// brute-force orbit oracle, exact tiling mass, zero-deviation generator
/// images, and inclusion maps that compose and transport consistently.
SuiteReport run_dynamics_suite(const Tolerances& tol = {});

/// @brief End-to-end approximation runs on the injectivized rotation chain:
/// seeded non-invertible inputs, epsilon in {0.5, 0.1}, with the certificate
/// numbers recomputed here from raw outputs.
SuiteReport run_pipeline_suite(std::uint64_t seed, int inputs,
                               const Tolerances& tol = {});

/// @brief All six suites at their contract sizes (200/500/20/10/–/5 draws).
std::vector<SuiteReport> run_all_suites(std::uint64_t seed,
                                        const Tolerances& tol = {});

Json report_to_json(const SuiteReport& r);
Json reports_to_json(const std::vector<SuiteReport>& rs, std::uint64_t seed,
                     const Tolerances& tol);

// --- seeded generators, shared with the test binaries ----------------------

/// @brief Deterministic draws built on the mt19937_64 output sequence only,
/// so results are identical across standard libraries.
struct TestRng {
    std::mt19937_64 eng;
    explicit TestRng(std::uint64_t seed) : eng(seed) {}
    /// Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    /// Uniform in {0, ..., n-1}.
    int below(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }
    /// Real and imaginary parts uniform in [-1, 1].
    Cplx box() { return {2.0 * unit() - 1.0, 2.0 * unit() - 1.0}; }
};

Mat random_matrix(TestRng& r, int n);
Mat random_unitary(TestRng& r, int n);

/// @brief Random valid presentation: up to max_levels levels, sizes at most
/// max_n, a handful of points per level, glued points sourcing distinct
/// earlier free points.
PresentationPtr random_presentation(TestRng& r, int max_levels, int max_n);

/// @brief Homogeneous variant: every level the same size, every glued point
/// identified with a single earlier free point.
PresentationPtr random_homogeneous_presentation(TestRng& r);

/// @brief Element with seeded free values (entries in the unit box).
Element random_element(TestRng& r, PresentationPtr p);

/// @brief Fixed three-step chain (sizes 2, then 4, then {92, 184} with one
/// glued point) whose geometry drives the full conjugation ladder of the
/// approximation pipeline: an input singular only at the first level-1 point
/// widens at the middle level and lands at the top one.
Chain synthetic_ladder_chain();

/// @brief The rotation by 377/610 with arcs [0,1/8] ⊃ [0,1/32] ⊃ [0,1/128].
RotationSystem fibonacci_system();

/// @brief Seeded non-invertible element on presentation p for arc s_index:
/// a trig polynomial times the arc distance to the forward image of one or
/// two return-time pieces, pushed through the generator construction.  The
/// element vanishes identically on a cross at index 1 over the chosen
/// piece's sampled points.
Element seeded_noninvertible(const RotationSystem& sys, int s_index,
                             PresentationPtr p, std::uint64_t seed);

} // namespace dsh
