/* dsh/maps.hpp — diagonal maps between presentations, chains of such maps,
 * propagation / size scans along a chain, quotients, chain injectivization,
 * and the homogeneous collapse.
 *
 * A diagonal map from presentation A to presentation B carries, for every
 * point x of every level i of B, an ordered table entry
 * ((i_1, x_1), ..., (i_t, x_t)) of A-points with n_{i_1} + ... + n_{i_t} =
 * n_i^B, and acts on elements by
 *
 *   psi(f)_i(x) = diag(f_{i_1}(x_1), ..., f_{i_t}(x_t)).
 *
 * Entries at B's Y points must equal the concatenation of the entries at the
 * decomposition sources, so images of valid elements are valid exactly.
 */
#pragma once

#include "dsh/presentation.hpp"

#include <optional>

namespace dsh {

/// @brief A diagonal map; table[level-1][point position] lists the source points.
struct DiagonalMap {
    PresentationPtr source;
    PresentationPtr target;
    std::vector<std::vector<std::vector<Source>>> table;
};

/// @brief Structural scan of a map; returns violations, empty iff valid.
std::vector<std::string> validate_map(const DiagonalMap& m);

/// @brief The identity map on p: singleton table entries at free points, the
/// decomposition itself at Y points.
DiagonalMap identity_map(PresentationPtr p);

/// @brief Composition outer ∘ inner (inner's target must equal outer's source).
DiagonalMap compose_maps(const DiagonalMap& outer, const DiagonalMap& inner);

/// @brief Applies the map to a source element; the image is valid exactly.
Element apply_map(const DiagonalMap& m, const Element& f);

/// @brief Distinct source spectrum points under a free target point, with Y
/// table entries unfolded through their decompositions; sorted by (level, id).
std::vector<SpectrumPoint> spectrum_multimap(const DiagonalMap& m, int i,
                                             const std::string& id);

/// @brief A finite chain A_1 -> A_2 -> ... -> A_K of diagonal maps.
struct Chain {
    std::vector<PresentationPtr> algebras;
    std::vector<DiagonalMap> maps;           // maps[t]: algebras[t] -> algebras[t+1]
};

/// @brief Structural scan of a chain (endpoints line up, every map valid).
std::vector<std::string> validate_chain(const Chain& c);

/// @brief Smallest j' > j such that every spectrum point of A_{j'} pulls back
/// (through the composed maps) to meet u; nullopt if the chain is exhausted.
///
/// u must be a nonempty set of free A_j points passing is_open_in_spectrum.
std::optional<int> check_propagation(const Chain& c, int j,
                                     const std::vector<SpectrumPoint>& u);

/// @brief Smallest j' > j whose smallest matrix size exceeds m; nullopt if none.
std::optional<int> find_big_enough(const Chain& c, int j, int m);

/// @brief Data of the coordinatewise restriction underlying a quotient.
struct QuotientMap {
    PresentationPtr source;
    PresentationPtr target;
    std::vector<int> level_map;            // source level i -> target level, 0 if dropped
    std::vector<std::vector<int>> kept;    // per source level: kept positions, in order
};

struct QuotientResult {
    PresentationPtr quotient;
    QuotientMap gamma;
};

/// @brief Quotient by the retained point set s (ids across levels; may include
/// Y points, whose sources must then also lie in s).
///
/// Level i of the quotient keeps the points of s plus every Y point all of
/// whose sources are retained; empty levels are dropped and the remaining
/// levels renumbered.  Errors if s is not saturated or the result is invalid.
QuotientResult quotient_presentation(const Presentation& p,
                                     const std::vector<std::pair<int, std::string>>& s);

/// @brief Coordinatewise restriction of an element through a quotient.
Element restrict_element(const QuotientMap& gamma, const Element& f);

/// @brief Replaces each algebra by its quotient onto the points actually
/// reached from the final algebra, with induced maps; the final algebra is
/// unchanged and every induced map hits all of its source spectrum.
Chain injectivize_chain(const Chain& c);

/// @brief One identified point of the collapsed space: a free representative
/// plus every Y point glued to it.
struct CollapsedClass {
    SpectrumPoint rep;
    std::vector<std::pair<int, std::string>> members;   // rep first
};

/// @brief The collapsed space of a homogeneous presentation (all n_i equal).
struct CollapsedSpace {
    int n = 0;
    std::vector<CollapsedClass> classes;
};

/// @brief Identifies each Y point with its unique source; errors on unequal
/// sizes or a Y point with more than one source.
CollapsedSpace collapse_homogeneous(const Presentation& p);

/// @brief Evaluates an element as one matrix per collapsed point.
std::vector<Mat> collapse_transport(const CollapsedSpace& space, const Element& f);

/// @brief Inverse of the transport: rebuilds the element from collapsed values.
Element collapse_lift(PresentationPtr p, const CollapsedSpace& space,
                      const std::vector<Mat>& values);

} // namespace dsh
