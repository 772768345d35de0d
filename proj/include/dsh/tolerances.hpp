/* dsh/tolerances.hpp — the three numeric thresholds used throughout.
 *
 *   tau_zero : entries at or below this modulus are treated as exact zeros
 *              (zero crosses, block points, bandwidth, truncation).
 *   tau_sing : a matrix whose smallest singular value is at or below this
 *              is treated as non-invertible.
 *   tau_eq   : tolerance for structural equality checks (block-diagonal
 *              consistency at glued points, map identities).
 */
#pragma once

#include "dsh/errors.hpp"

namespace dsh {

struct Tolerances {
    double tau_zero = 1e-12;
    double tau_sing = 1e-9;
    double tau_eq = 1e-10;

    /// @brief Enforce the structural constraints (non-negativity, tau_zero ≤ tau_eq).
    void validate() const {
        require(tau_zero >= 0.0 && tau_sing >= 0.0 && tau_eq >= 0.0,
                "tolerances.negative", "matcore", "Tolerances", "all non-negative");
        require(tau_zero <= tau_eq, "tolerances.ordering", "matcore", "Tolerances",
                "tau_zero <= tau_eq");
    }
};

} // namespace dsh
