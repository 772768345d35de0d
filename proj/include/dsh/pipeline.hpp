/* dsh/pipeline.hpp — the stable-rank-one approximation pipeline.
 *
 * Given a chain A_1 -> ... -> A_K of diagonal maps and a non-invertible
 * element a of A_j, the pipeline produces an invertible element a' at a
 * later level j' together with a certificate that
 *
 *   || psi_{j',j}(a) - a' || <= eps,
 *
 * recomputed from the raw outputs.  The stages:
 *
 *   perturb_noninvertible  move a by at most eps/4 so that w f' v carries an
 *                          exact zero cross at index 1 on an open marked set
 *   far_out                push along the chain until every spectrum point
 *                          unfolds into the marked set, then conjugate so the
 *                          crosses recur at spacing M, N of them per window
 *   block_on_set           entrywise shrink installing exact block points on
 *                          neighbourhoods of the decomposition-start sets
 *   cross_shift            conjugate so each group of N spaced crosses
 *                          becomes N contiguous crosses at the block starts
 *   lower_triangularize    conjugate the banded, cross-aligned element to a
 *                          strictly lower triangular (hence nilpotent) one
 *   finish_invertible      additive finisher t + eps * unit for the nilpotent
 *
 * approximate_invertible drives the stages end to end with per-stage eps/4
 * budgets.  When the finite chain is too short for the conjugation ladder
 * (the spacing N*M exceeds every later minimum matrix size) but the marked
 * set does propagate, the driver falls back to a pointwise singular-value
 * factorization at the propagation level: rotating the factorization of
 * F = psi(w f' v) by one row turns it strictly lower triangular, and lifting
 * the singular values restores an invertible element at distance <= eps/4.
 * Both routes end with the same certificate shape and the same checks.
 */
#pragma once

#include "dsh/indicators.hpp"
#include "dsh/maps.hpp"
#include "dsh/paths.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dsh {

/// @brief Certificate sets: (level, diagonal index) -> point ids.
using CertificateSets = std::map<std::pair<int, int>, std::vector<std::string>>;

/// @brief End-to-end budget: four equal per-stage allowances summing to eps.
struct PipelineBudget {
    double epsilon = 0.0;
    std::array<double, 4> splits{};
};

/// @brief Equal four-way split; errors unless eps > 0.
PipelineBudget make_budget(double eps);

/// @brief Output of the perturbation stage.
struct PerturbResult {
    Element f_prime;                    // ||f - f_prime|| <= eps
    Element w;                          // unitary, identity off the patched set
    Element v;                          // unitary, identity off the patched set
    Element delta;                      // diagonal marker, entries in [0, 1]
    std::vector<SpectrumPoint> u_set;   // marked open set (free, never sourced)
    double distance = 0.0;              // measured ||f - f_prime||
};

/// @brief Moves f by at most eps so that (w f' v) has an exact zero cross at
/// index 1 everywhere on the returned marked set.
///
/// If f already carries exact crosses at index 1 at free, never-sourced
/// points, those points are marked and f is only truncated at tau_zero.
/// Otherwise the least-invertible evaluation is located; if that point only
/// appears inside later decompositions, the search climbs to the largest
/// level that sources it and patches near the sourcing point instead.  All
/// points within the budget of the witness value are patched to the
/// cross-factorized truncation of that value.
///
/// Errors: "pipeline.no-witness" if f is invertible; "pipeline.no-free-
/// neighborhood" if no free, never-sourced point sits within the budget;
/// "pipeline.budget-too-small" if even the truncation exceeds eps.
PerturbResult perturb_noninvertible(const Element& f, double eps,
                                    const Tolerances& tol = {});

/// @brief Parameters the widening stage reads off the chain.
struct WideningPlan {
    int j_land = 0;       // smallest later level whose spectrum unfolds into the marked set
    int m = 0;            // cross spacing M = twice the largest matrix size at j_land
    int n_crosses = 0;    // N = largest matrix size at j, plus M + 1
    std::optional<int> j_prime;   // smallest later level with min matrix size > N*M
};

/// @brief Scans the chain for the landing level and the spacing parameters.
/// Errors with "pipeline.chain-exhausted" when no level absorbs the marked set.
WideningPlan plan_far_out(const Chain& c, int j,
                          const std::vector<SpectrumPoint>& u_set);

/// @brief Output of the widening stage.
struct FarOutResult {
    int j_prime = 0;      // level the pipeline lands on
    int m = 0;            // cross spacing M
    int n_crosses = 0;    // crosses per window N
    Element big_w;        // the marker-steered conjugator W at level j_prime
    Element v_left;       // V  = W * psi(w)
    Element v_right;      // V' = psi(v) * W*
    Element b;            // V * psi(f') * V'
    CertificateSets certificates;  // (i,k) -> points where b has crosses at k, k+M, ..., k+(N-1)M
};

/// @brief Pushes the perturbed element along the chain and conjugates it so
/// the single marked cross recurs at spacing m, n_crosses times, on
/// neighbourhoods of every decomposition-start set of the landing level.
///
/// Errors with "pipeline.chain-exhausted" when either no level absorbs the
/// marked set or no later level has min matrix size > n_crosses * m.
FarOutResult far_out(const Chain& c, int j, const PerturbResult& pr,
                     const Tolerances& tol = {});

/// @brief Output of the block stage.
struct BlockOnSetResult {
    Element g;                 // ||f - g|| <= eps, crosses preserved, bandwidth non-increasing
    CertificateSets o_sets;    // (i,k) -> points where g has an exact block point at k
    double distance = 0.0;     // measured ||f - g||
};

/// @brief Entrywise shrink z -> (z/|z|) * max(0, |z| - delta) with
/// delta = eps / max_size^2: zeroes every entry of modulus <= delta, so each
/// decomposition-start set gains a neighbourhood of exact block points while
/// zero crosses survive and bandwidth never grows.
BlockOnSetResult block_on_set(const Element& f, double eps,
                              const Tolerances& tol = {});

/// @brief Output of the shift stage.
struct CrossShiftResult {
    Element v;                 // unitary conjugator
    CertificateSets o_sets;    // (i,k) -> points where v g v* has crosses at k..k+N-1
};

/// @brief Conjugates g, which on u_sets[(i,k)] has a block point at k and
/// zero crosses at k, k+m, ..., k+(n_crosses-1)m, into an element with
/// contiguous crosses at k..k+n_crosses-1 there; bandwidth grows by at most 2.
///
/// Requires n_crosses * m < min matrix size ("pipeline.spacing-too-large")
/// and validates the cross/block hypotheses on the given sets
/// ("pipeline.hypothesis-failed").
CrossShiftResult cross_shift(const Element& g, int m, int n_crosses,
                             const CertificateSets& u_sets,
                             const Tolerances& tol = {});

/// @brief Builds the unitary v' with (g2 * v') strictly lower triangular at
/// every point, given that g2 has bandwidth <= n_crosses everywhere and
/// contiguous crosses at k..k+n_crosses-1 on u_sets[(i,k)].
///
/// Requires n_crosses < min matrix size and validates the hypotheses; the
/// strict lower-triangularity of the product is re-verified at tau_zero
/// before returning ("pipeline.triangularization-failed").
Element lower_triangularize(const Element& g2, int n_crosses,
                            const CertificateSets& u_sets,
                            const Tolerances& tol = {});

/// @brief Additive finisher t + eps * unit for a pointwise strictly lower
/// triangular t; the sum is verified invertible per is_invertible_element
/// ("pipeline.finish-not-invertible" — large matrix sizes can defeat the
/// additive finisher numerically even though its spectrum is {eps}).
Element finish_invertible(const Element& t, double eps,
                          const Tolerances& tol = {});

/// @brief Lifts every singular value of every evaluation to at least `floor`
/// (u * diag(sigma) * v^adj becomes u * diag(max(sigma, floor)) * v^adj),
/// moving the element by at most `floor` and making every evaluation
/// invertible with that margin.  Block-diagonal structure is preserved, so
/// derived elements stay derived.
Element lift_singular_floor(const Element& f, double floor);

/// @brief Entrywise truncation at tau applied at every point.
Element chop_element(const Element& f, double tau);

/// @brief One measured stage of the pipeline.
struct StageRecord {
    std::string stage;
    double distance = 0.0;
};

/// @brief End-to-end certificate; every number is recomputed from the raw
/// stage outputs, never copied from intermediate bookkeeping.
struct PipelineCertificate {
    bool already_invertible = false;
    std::string route;                 // "none", "ladder", or "svd"
    int j = 0;
    int j_prime = 0;
    int m = 0;                         // cross spacing (0 on route "none")
    int n_crosses = 0;
    double epsilon = 0.0;
    std::vector<StageRecord> stages;   // each distance <= epsilon/4
    double total_distance = 0.0;       // ||psi_{j',j}(a) - a'||, recomputed
    double floor = 0.0;                // min singular value of a' over all points
    double nilpotent_residual = 0.0;   // max over points of ||t^(n_i)||
    double max_unitary_defect = 0.0;   // worst ||U U* - 1|| over stage unitaries
    int bandwidth_after_widen = 0;     // ladder route only, else 0
    int bandwidth_after_block = 0;
    int bandwidth_after_shift = 0;
    std::optional<Element> a_prime;    // the certified invertible element
    std::optional<Element> nilpotent;  // the strictly lower triangular stage output
    std::vector<SpectrumPoint> u_set;  // marked set from the perturbation stage
};

/// @brief Runs the pipeline end to end at level j of the chain.
///
/// Invertible inputs short-circuit with zero distance.  Otherwise the
/// conjugation ladder runs when the chain holds a level with min matrix size
/// > N*M; if only the landing level exists, the pointwise factorization
/// route finishes there.  Errors with "pipeline.chain-exhausted" when the
/// marked set never propagates.
PipelineCertificate approximate_invertible(const Chain& c, int j,
                                           const Element& a, double eps,
                                           const Tolerances& tol = {});

} // namespace dsh
