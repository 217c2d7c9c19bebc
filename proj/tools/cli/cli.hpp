#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdual/io.hpp"

namespace mdual::cli {

enum class Command { solve, conjugate, recession, relax, gap, pairing, check_optimality, oracle };

std::string to_string(Command c);
/// Throws ParseError for unknown names.
Command command_from_string(const std::string& name);

struct RunConfig {
  Command command = Command::solve;
  /// Problem file, or a directory whose *.json files are processed in id order.
  std::string input;
  /// Empty: JSON on stdout. A ".csv" suffix selects the table, anything else JSON.
  std::string output;
  /// Fixture root for `oracle` when no input is given; falls back to MD_FIXTURE_DIR.
  std::string fixture_dir;
  std::optional<double> tol_gap;
  std::optional<double> tol_ac;
  std::uint64_t seed = 0;
  std::vector<double> schedule{0.1, 0.05, 0.025, 0.0125};
  /// Argument z* of `conjugate` / direction z of `recession`.
  std::vector<double> at;
  /// `solve` only: also solve the mollified problems at these radii.
  std::vector<double> sweep;
};

/// Strict: unknown keys throw ParseError.
RunConfig config_from_json(const Json& j);

/// "0.1,0.05" -> {0.1, 0.05}. Throws ParseError.
std::vector<double> parse_list(const std::string& text);

/// One CSV row. Unset numeric fields print as "n-a".
struct TableRow {
  std::string fixture;
  std::optional<double> relaxed_energy;
  std::optional<double> dual_value;
  std::optional<double> gap;
  std::optional<double> ac_residual;
  std::optional<double> singular_residual;
  std::string verdict = "n-a";  // pass, fail or n-a
  /// Command-specific columns appended after the fixed ones; every row of a
  /// table carries the same keys in the same order.
  std::vector<std::pair<std::string, std::string>> extra;
};

/// 12 significant digits; infinities as +inf / -inf.
std::string format_number(double v);

/// Header fixture,relaxed_energy,dual_value,gap,ac_residual,singular_residual,verdict
/// then the extra columns of the first row. LF line endings.
std::string emit_table(const std::vector<TableRow>& rows);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomically(const std::string& path, const std::string& content);

/// 0 success / all verdicts pass, 2 when some verdict fails, 1 on errors
/// (message on `err`, prefixed by the error name).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace mdual::cli
