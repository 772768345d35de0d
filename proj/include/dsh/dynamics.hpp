/* dsh/dynamics.hpp — orbit-breaking presentations from circle rotations.
 *
 * The system is a rotation x -> x + alpha (mod 1) with exact rational alpha,
 * together with a nested family of closed arcs S_0 ⊃ S_1 ⊃ ... .  For an arc
 * S the first-return time lambda(x) = min{n > 0 : x + n·alpha ∈ S} is
 * piecewise constant; splitting S by its value yields closed subintervals
 * X_i (one group per distinct return time n_i, ascending) whose boundary
 * points with a different return time of their own form Y_i.  Sampling the
 * subintervals produces a presentation in which a Y point y decomposes along
 * its orbit: sources (i_1, y), (i_2, h^{b_1} y), ... with b_t the partial
 * sums of the intermediate return times.
 *
 * Elements are induced by two kinds of circle data: a function f gives the
 * diagonal matrix of f along the orbit, and a shifted function u·g (g
 * vanishing on S exactly) gives the subdiagonal matrix of g along the orbit.
 * Inclusions of nested arcs induce diagonal maps by listing, for each point
 * of the inner presentation, its visit points in the outer arc.
 *
 * All arithmetic on orbit points is exact rational; return times are guarded
 * by the denominator of alpha (a rational rotation is faithful to the
 * irrational picture only for orbits shorter than its period).
 */
#pragma once

#include "dsh/maps.hpp"
#include "dsh/presentation.hpp"
#include "dsh/rational.hpp"

#include <functional>

namespace dsh {

/// @brief A rotation by an exact rational angle with nested probe arcs.
struct RotationSystem {
    Rat alpha;
    std::vector<Arc> arcs;        // arcs[0] ⊃ arcs[1] ⊃ ...
};

/// @brief Structural scan; returns violations, empty iff usable.
std::vector<std::string> validate_system(const RotationSystem& sys);

/// @brief x + steps·alpha reduced mod 1, exactly.
Rat rotate(const RotationSystem& sys, const Rat& x, long steps = 1);

/// @brief First-return time of x ∈ arcs[s_index] to that arc, exactly;
/// errors if the denominator guard is exceeded.
int first_return(const RotationSystem& sys, int s_index, const Rat& x);

/// @brief One return-time class: its time, closed subintervals, and boundary
/// points whose own return time differs.
struct ReturnLevel {
    int n = 0;
    std::vector<Arc> intervals;    // ascending, exact endpoints
    std::vector<Rat> y_points;     // ascending
};

/// @brief The full return-time decomposition of one arc, times ascending.
struct ReturnPartition {
    std::vector<ReturnLevel> levels;
};

/// @brief Splits the arc by first-return time via exact endpoint arithmetic.
/// The classes tile the circle: sum of n_i times total length of X_i is 1.
ReturnPartition return_partition(const RotationSystem& sys, int s_index);

/// @brief Samples the return partition into a presentation: per subinterval,
/// both endpoints plus grid_points uniform interior points; point ids are the
/// exact rationals ("num/den"); decompositions from the orbit walk described
/// above.  extra lists additional exact points to include (they must lie in
/// the arc); the grid is closed over all decomposition sources.
PresentationPtr build_presentation(const RotationSystem& sys, int s_index,
                                   int grid_points,
                                   const std::vector<Rat>& extra = {});

/// @brief Circle data inducing elements: a plain function of the angle, or a
/// shifted function that must vanish on the arc exactly.
struct Generator {
    enum class Kind { Function, Shifted };
    Kind kind = Kind::Function;
    std::function<Cplx(const Rat&)> sample;
};

/// @brief Evaluates the generator's induced matrix function at every sampled
/// point directly (Y points included); the block-diagonal constraints then
/// hold with zero deviation by the orbit structure, not by construction.
Element generator_image(const RotationSystem& sys, int s_index,
                        const PresentationPtr& p, const Generator& gen);

/// @brief The diagonal map induced by the inclusion arcs[inner] ⊆ arcs[outer],
/// between presentations previously built for those arcs.  Table entries are
/// the outer-arc visit lists; every visit point must exist in source_p (build
/// the source with the visit points as extras, as build_chain does).
DiagonalMap build_inclusion(const RotationSystem& sys, int outer, int inner,
                            PresentationPtr source_p, PresentationPtr target_p);

/// @brief Presentations for all arcs joined by inclusion maps, innermost arc
/// sampled first and each outer grid closed over the visit points the next
/// map needs.  Requires at least two arcs.
Chain build_chain(const RotationSystem& sys, int grid_points);

} // namespace dsh
