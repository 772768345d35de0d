/* dsh/indicators.hpp — diagonal indicator elements that mark, at every point,
 * the offsets of its decomposition blocks.
 *
 * Given a gap width M and ascending offsets K_1 < ... < K_m with K_1 >= 0,
 * K_m < s(A) - M (s(A) the smallest matrix size) and consecutive gaps >= M,
 * the element Phi is diagonal with entries in {0, 1}:
 *
 *   Phi_i(x)_{j,j} = 1   iff   x has a decomposition block starting at
 *                              index j - K_t for some t.
 *
 * The offset constraints force the final M diagonal entries to vanish and
 * keep nonzero entries at least M apart.  Theta additionally vanishes at
 * (j,j) on prescribed forbidden sets F_{i,j} (each required to be disjoint
 * from the block-start sets it would otherwise mark) and comes with
 * certificate sets on which its marked entries equal 1 exactly.
 */
#pragma once

#include "dsh/presentation.hpp"

#include <map>

namespace dsh {

/// @brief Parameters for the indicator constructions.
struct IndicatorSpec {
    int M = 1;                       // gap width
    std::vector<int> K;              // ascending offsets
    /// Forbidden points per (level, diagonal index): Theta_i(x)_{j,j} = 0 there.
    std::map<std::pair<int, int>, std::vector<std::string>> F;
};

/// @brief Structural scan of a spec against a presentation; empty iff usable.
std::vector<std::string> validate_indicator_spec(const Presentation& p,
                                                 const IndicatorSpec& spec);

/// @brief The 0/1 block-start marker element described above (F is ignored).
Element build_phi(PresentationPtr p, const IndicatorSpec& spec);

/// @brief Theta plus the certificate sets U_{i,j} (one per nonempty
/// block-start set) on which the marked entries are exactly 1.
struct ThetaResult {
    Element theta;
    std::map<std::pair<int, int>, std::vector<std::string>> certificates;
};

/// @brief Like build_phi but vanishing on the forbidden sets, with certificates.
ThetaResult build_theta(PresentationPtr p, const IndicatorSpec& spec);

} // namespace dsh
