#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

#include "mdual/measure.hpp"
#include "mdual/pairing.hpp"
#include "mdual/primal_dual.hpp"

namespace mdual {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "measure-duality/v1";

/// Parses JSON text; syntax errors become ParseError carrying
/// "<source>:<line>:<column>".
Json parse_json(const std::string& text, const std::string& source = "<input>");
Json load_json_file(const std::string& path);
/// Pretty-printed with a trailing newline; key order is sorted, so output
/// is deterministic.
std::string dump_json(const Json& j);

/// A problem file: the problem plus an optional candidate measure and
/// dual variable.
struct ProblemFile {
  Problem problem;
  std::optional<DiscreteMeasure> measure;
  std::optional<Vector> wstar;
};

/// Strict: unknown keys, a missing or different "schema" tag and type
/// mismatches throw ParseError naming the offending JSON path.
ProblemFile problem_file_from_json(const Json& j, const std::string& fallback_id = {});
ProblemFile load_problem_file(const std::string& path);

Grid grid_from_json(const Json& j, const std::string& path = "/grid");
Json grid_to_json(const Grid& grid);

/// Accepts "abs", "area", "huber(g)", "weighted_abs" objects with a
/// per-cell "weight", "tabulated" objects with "points" and optional "M",
/// and "mollified" objects with "base" and "delta".
ConvexIntegrand integrand_from_json(const Json& j, const Grid& grid, int components,
                                    const std::string& path = "/integrand");

ConstraintOperator operator_from_json(const Json& j, const Grid& grid, int components,
                                      const std::string& path = "/operator");

/// {"density": [[...] per cell], "atoms": [{"cell", "mass"}]}, optionally
/// with "grid" and "components" (which must then match).
DiscreteMeasure measure_from_json(const Json& j, const Grid& grid, int components,
                                  const std::string& path = "/measure");
Json measure_to_json(const DiscreteMeasure& mu, bool with_grid = false);

/// Finite numbers as numbers, infinities as "+inf" / "-inf".
Json number_to_json(double v);
Json number_to_json(const ExtendedReal& v);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& path);

Json certificate_to_json(const DualCertificate& cert);
Json solve_report_to_json(const SolveReport& r);
Json optimality_report_to_json(const OptimalityReport& r);
Json pairing_to_json(const PairingMeasure& lambda);

}  // namespace mdual
