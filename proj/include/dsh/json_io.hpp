/* dsh/json_io.hpp — versioned JSON formats and canonical serialization.
 *
 * Every file format carries a "schema" tag ("dsh-presentation-v1",
 * "dsh-element-v1", "dsh-map-v1", "dsh-chain-v1", "rotation-system-v1",
 * "pipeline-cert-v1"); parsing an unknown or missing tag raises an "io.*"
 * error, which the command-line driver maps to exit code 2.
 *
 * Serialization is canonical: object keys are sorted (the default nlohmann
 * object container), doubles print in shortest round-trip form, and repeated
 * dumps of the same data are byte-identical.  Presentations are identified
 * across files by a 64-bit FNV-1a hash of their canonical dump.
 *
 * Exact rationals serialize as strings ("377/610") so arbitrary precision
 * survives the trip; plain integers are accepted on input.
 */
#pragma once

#include "dsh/dynamics.hpp"
#include "dsh/maps.hpp"
#include "dsh/pipeline.hpp"
#include "dsh/presentation.hpp"

#include "json.hpp"

#include <string>

namespace dsh {

using Json = nlohmann::json;

// --- matrices -------------------------------------------------------------

/// @brief {"rows":r,"cols":c,"re":[[...]],"im":[[...]]} with row-major arrays.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

// --- presentations ----------------------------------------------------------

Json presentation_to_json(const Presentation& p);
PresentationPtr presentation_from_json(const Json& j);

/// @brief 64-bit FNV-1a hash of the canonical dump, as 16 hex digits.
std::string presentation_hash(const Presentation& p);

// --- elements ---------------------------------------------------------------

/// @brief Values for every point (glued ones included) keyed "level.point",
/// plus the presentation hash; round-trips verbatim.
Json element_to_json(const Element& f);

/// @brief Rebuilds the element on p; requires the stored hash to match.
Element element_from_json(const Json& j, PresentationPtr p);

// --- diagonal maps and chains -----------------------------------------------

/// @brief Table keyed by target point "level.point", each entry the ordered
/// source list; carries both presentation hashes.
Json map_to_json(const DiagonalMap& m);
DiagonalMap map_from_json(const Json& j, PresentationPtr source,
                          PresentationPtr target);

/// @brief Presentations in order plus the connecting maps.
Json chain_to_json(const Chain& c);
Chain chain_from_json(const Json& j);

// --- rotation systems ---------------------------------------------------------

Json system_to_json(const RotationSystem& sys);
RotationSystem system_from_json(const Json& j);

// --- pipeline certificates ----------------------------------------------------

/// @brief The certificate's numbers and stage ledger; the approximant and the
/// nilpotent part are embedded only when include_elements is set.
Json certificate_to_json(const PipelineCertificate& cert,
                         bool include_elements = false);

// --- canonical file handling ---------------------------------------------------

/// @brief Sorted keys, two-space indent, shortest round-trip doubles, and a
/// trailing newline; repeated dumps of equal data are byte-identical.
std::string canonical_dump(const Json& j);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

/// @brief Raises "io.schema-version" unless j carries {"schema": expected}.
void require_schema(const Json& j, const char* expected, const char* operation);

/// @brief The versioned format descriptions, one entry per schema tag.
Json schema_bundle();

} // namespace dsh
