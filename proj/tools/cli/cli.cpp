#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mdual/errors.hpp"
#include "mdual/pairing.hpp"
#include "mdual/primal_dual.hpp"

namespace mdual::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<Command, const char*> kCommands[] = {
    {Command::solve, "solve"},
    {Command::conjugate, "conjugate"},
    {Command::recession, "recession"},
    {Command::relax, "relax"},
    {Command::gap, "gap"},
    {Command::pairing, "pairing"},
    {Command::check_optimality, "check-optimality"},
    {Command::oracle, "oracle"},
};

constexpr double kSolveTolGap = 1e-3;
constexpr double kOracleTol = 2e-2;

struct Item {
  Json report;
  std::vector<TableRow> rows;
};

const char* verdict(bool pass) { return pass ? "pass" : "fail"; }

Vector at_vector(const RunConfig& cfg, const Problem& p) {
  if (cfg.at.size() != static_cast<std::size_t>(p.components())) {
    throw DimensionMismatch("--at needs " + std::to_string(p.components()) + " values, got " +
                            std::to_string(cfg.at.size()));
  }
  return Eigen::Map<const Vector>(cfg.at.data(), static_cast<Eigen::Index>(cfg.at.size()));
}

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions opts;
  opts.primal.seed = cfg.seed;
  return opts;
}

// The measure and certificate stored in the file, solving for whichever is missing.
std::pair<DiscreteMeasure, DualCertificate> pair_for(const ProblemFile& file,
                                                     const RunConfig& cfg) {
  const Problem& p = file.problem;
  if (!file.measure) {
    SolveReport rep = solve(p, solve_options(cfg));
    if (file.wstar) return {rep.primal, make_certificate(p, *file.wstar)};
    return {rep.primal, rep.certificate};
  }
  if (file.wstar) return {*file.measure, make_certificate(p, *file.wstar)};
  DualCertificate best = certificate_from_primal(p, *file.measure);
  DualCertificate ascent = solve_dual(p);
  if (ascent.r_value > best.r_value) best = ascent;
  return {*file.measure, best};
}

Item do_solve(const ProblemFile& file, const RunConfig& cfg) {
  const Problem& p = file.problem;
  const double tol = cfg.tol_gap.value_or(kSolveTolGap);
  const SolveReport rep = solve(p, solve_options(cfg));
  Item item;
  item.report = solve_report_to_json(rep);
  item.report["verdict"] = verdict(rep.gap <= tol);
  TableRow row;
  row.fixture = p.id();
  row.relaxed_energy = rep.relaxed_energy;
  row.dual_value = rep.certificate.r_value.value();
  row.gap = rep.gap;
  row.verdict = verdict(rep.gap <= tol);
  row.extra = {{"primal_iterations", std::to_string(rep.primal_iterations)},
               {"dual_iterations", std::to_string(rep.dual_iterations)}};
  // With a sweep the table holds one row per radius, compared against the base solve.
  if (cfg.sweep.empty()) item.rows.push_back(row);
  Json sweep = Json::array();
  for (double delta : cfg.sweep) {
    const Problem pd = mollified_family(p, delta);
    const SolveReport rd = solve(pd, solve_options(cfg));
    const double shift = std::abs(rd.relaxed_energy - rep.relaxed_energy);
    sweep.push_back(Json{{"delta", delta}, {"report", solve_report_to_json(rd)},
                         {"energy_shift", number_to_json(shift)}});
    TableRow r;
    r.fixture = p.id();
    r.relaxed_energy = rd.relaxed_energy;
    r.dual_value = rd.certificate.r_value.value();
    r.gap = rd.gap;
    r.verdict = verdict(rd.gap <= tol);
    r.extra = {{"primal_iterations", std::to_string(rd.primal_iterations)},
               {"dual_iterations", std::to_string(rd.dual_iterations)},
               {"delta", format_number(delta)},
               {"energy_shift", format_number(shift)}};
    item.rows.push_back(r);
  }
  if (!cfg.sweep.empty()) item.report["sweep"] = sweep;
  return item;
}

Item do_conjugate(const ProblemFile& file, const RunConfig& cfg) {
  const Problem& p = file.problem;
  const Vector zstar = at_vector(cfg, p);
  Json values = Json::array();
  Json argmax = Json::array();
  double lo = INFINITY;
  double hi = -INFINITY;
  for (int c = 0; c < p.cells(); ++c) {
    const ConjugateResult r = conjugate_with_argmax(p.f(), p.center(c), zstar);
    values.push_back(number_to_json(r.value));
    argmax.push_back(r.argmax.size() ? vector_to_json(r.argmax) : Json(nullptr));
    lo = std::min(lo, r.value.value());
    hi = std::max(hi, r.value.value());
  }
  Item item;
  item.report = Json{{"at", vector_to_json(zstar)}, {"values", values}, {"argmax", argmax}};
  TableRow row;
  row.fixture = p.id();
  row.extra = {{"min_value", format_number(lo)}, {"max_value", format_number(hi)}};
  item.rows.push_back(row);
  return item;
}

Item do_recession(const ProblemFile& file, const RunConfig& cfg) {
  const Problem& p = file.problem;
  const Vector z = at_vector(cfg, p);
  Json values = Json::array();
  double lo = INFINITY;
  double hi = -INFINITY;
  for (int c = 0; c < p.cells(); ++c) {
    const double v = recession(p.f(), p.center(c), z);
    values.push_back(number_to_json(v));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Item item;
  item.report = Json{{"at", vector_to_json(z)}, {"values", values}};
  TableRow row;
  row.fixture = p.id();
  row.extra = {{"min_value", format_number(lo)}, {"max_value", format_number(hi)}};
  item.rows.push_back(row);
  return item;
}

Item do_relax(const ProblemFile& file, const RunConfig&) {
  const Problem& p = file.problem;
  if (!file.measure) throw ParseError(p.id() + ": relax needs a \"measure\"");
  const DiscreteMeasure& mu = *file.measure;
  const double total = relaxed_energy(p, mu);
  const double ac =
      relaxed_integral(p.f(), DiscreteMeasure(mu.grid(), mu.components(), mu.density()));
  Item item;
  item.report = Json{{"relaxed_energy", number_to_json(total)},
                     {"absolutely_continuous_part", number_to_json(ac)},
                     {"singular_part", number_to_json(total - ac)}};
  TableRow row;
  row.fixture = p.id();
  row.relaxed_energy = total;
  row.extra = {{"ac_part", format_number(ac)}, {"singular_part", format_number(total - ac)}};
  item.rows.push_back(row);
  return item;
}

Item do_gap(const ProblemFile& file, const RunConfig& cfg) {
  const Problem& p = file.problem;
  const auto [mu, cert] = pair_for(file, cfg);
  const double tol = cfg.tol_gap.value_or(OptimalityOptions{}.tol_gap);
  const double energy = relaxed_energy(p, mu);
  const double gap = duality_gap(p, mu, cert);
  Item item;
  item.report = Json{{"relaxed_energy", number_to_json(energy)},
                     {"certificate", certificate_to_json(cert)},
                     {"gap", number_to_json(gap)},
                     {"verdict", verdict(gap <= tol)}};
  TableRow row;
  row.fixture = p.id();
  row.relaxed_energy = energy;
  row.dual_value = cert.r_value.value();
  row.gap = gap;
  row.verdict = verdict(gap <= tol);
  item.rows.push_back(row);
  return item;
}

Item do_pairing(const ProblemFile& file, const RunConfig& cfg) {
  const Problem& p = file.problem;
  const auto [mu, cert] = pair_for(file, cfg);
  const PairingMeasure lambda = pairing_limit(mu, cert, cfg.schedule);
  const PairingBoundsReport bounds = verify_pairing_bounds(lambda, mu, cert);
  Item item;
  item.report = pairing_to_json(lambda);
  item.report["bounds"] = Json{{"regions_checked", bounds.regions_checked},
                               {"mass_violations", bounds.mass_violations},
                               {"worst_mass_excess", number_to_json(bounds.worst_mass_excess)},
                               {"density_violations", bounds.density_violations},
                               {"continuity_violations", bounds.continuity_violations}};
  bool pass = lambda.converged && bounds.pass();
  std::string density_ac = "n-a";
  if (cert.r_value.is_finite()) {
    DensityOptions dopts;
    if (cfg.tol_ac) dopts.tol_ac = *cfg.tol_ac;
    try {
      const DensityReport d = density_characterization(lambda, mu, cert, p.f(), dopts);
      item.report["density"] = Json{{"cells_tested", d.cells_tested},
                                    {"halo_cells", d.halo_cells},
                                    {"ac_max_error", number_to_json(d.ac_max_error)},
                                    {"singular_max_excess", number_to_json(d.singular_max_excess)},
                                    {"verdict", verdict(d.pass())}};
      density_ac = format_number(d.ac_max_error);
      pass = pass && d.pass();
    } catch (const HaloTooWide& e) {
      item.report["density"] = Json{{"error", e.what()}};
    }
  }
  item.report["verdict"] = verdict(pass);
  TableRow row;
  row.fixture = p.id();
  row.dual_value = cert.r_value.value();
  row.verdict = verdict(pass);
  row.extra = {{"lambda_total", format_number(total_variation(lambda.lambda))},
               {"max_change", format_number(lambda.max_change)},
               {"mass_violations", std::to_string(bounds.mass_violations)},
               {"density_ac_error", density_ac}};
  item.rows.push_back(row);
  return item;
}

Item do_check(const ProblemFile& file, const RunConfig& cfg) {
  const Problem& p = file.problem;
  const auto [mu, cert] = pair_for(file, cfg);
  OptimalityOptions opts;
  if (cfg.tol_gap) opts.tol_gap = *cfg.tol_gap;
  if (cfg.tol_ac) opts.tol_ac = *cfg.tol_ac;
  opts.schedule = cfg.schedule;
  const OptimalityReport r = optimality_check(p, mu, cert, opts);
  Item item;
  item.report = optimality_report_to_json(r);
  item.report["certificate"] = certificate_to_json(cert);
  TableRow row;
  row.fixture = p.id();
  row.relaxed_energy = relaxed_energy(p, mu);
  row.dual_value = cert.r_value.value();
  row.gap = r.gap;
  row.ac_residual = r.ac_residual;
  row.singular_residual = r.singular_residual;
  row.verdict = verdict(r.pass);
  item.rows.push_back(row);
  return item;
}

Item do_oracle(const ProblemFile& file, const RunConfig& cfg) {
  const Problem& p = file.problem;
  const double tol = cfg.tol_gap.value_or(kOracleTol);
  Item item;
  TableRow row;
  row.fixture = p.id();
  try {
    const OracleResult primal = brute_force_primal(p);
    const OracleResult dual = brute_force_dual(p);
    const double gap = std::abs(primal.value - dual.value);
    item.report = Json{{"primal_value", number_to_json(primal.value)},
                       {"primal_argument", vector_to_json(primal.argument)},
                       {"dual_value", number_to_json(dual.value)},
                       {"dual_argument", vector_to_json(dual.argument)},
                       {"gap", number_to_json(gap)},
                       {"verdict", verdict(gap <= tol)}};
    row.relaxed_energy = primal.value;
    row.dual_value = dual.value;
    row.gap = gap;
    row.verdict = verdict(gap <= tol);
  } catch (const TooLarge& e) {
    item.report = Json{{"skipped", e.what()}, {"verdict", "n-a"}};
  }
  item.rows.push_back(row);
  return item;
}

Item dispatch(const ProblemFile& file, const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::solve: return do_solve(file, cfg);
    case Command::conjugate: return do_conjugate(file, cfg);
    case Command::recession: return do_recession(file, cfg);
    case Command::relax: return do_relax(file, cfg);
    case Command::gap: return do_gap(file, cfg);
    case Command::pairing: return do_pairing(file, cfg);
    case Command::check_optimality: return do_check(file, cfg);
    case Command::oracle: return do_oracle(file, cfg);
  }
  throw DomainError("unhandled command");
}

std::vector<ProblemFile> load_inputs(const RunConfig& cfg) {
  std::string input = cfg.input;
  if (input.empty() && cfg.command == Command::oracle) {
    input = cfg.fixture_dir;
    if (input.empty()) {
      if (const char* env = std::getenv("MD_FIXTURE_DIR")) input = env;
    }
    if (input.empty()) throw ParseError("oracle needs --input, --fixtures or MD_FIXTURE_DIR");
  }
  if (input.empty()) throw ParseError("no input file given");
  if (!fs::is_directory(input)) return {load_problem_file(input)};
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<ProblemFile> files;
  for (const auto& path : paths) files.push_back(load_problem_file(path));
  std::stable_sort(files.begin(), files.end(), [](const ProblemFile& a, const ProblemFile& b) {
    return a.problem.id() < b.problem.id();
  });
  return files;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double json_number(const Json& j, const std::string& key) {
  if (!j.is_number()) throw ParseError("config/" + key + ": expected a number");
  return j.get<double>();
}

std::vector<double> json_list(const Json& j, const std::string& key) {
  if (j.is_string()) return parse_list(j.get<std::string>());
  if (!j.is_array()) throw ParseError("config/" + key + ": expected an array or a string");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(json_number(v, key));
  return out;
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (const auto& [cmd, n] : kCommands) {
    if (name == n) return cmd;
  }
  throw ParseError("unknown command '" + name + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + item + "' in list '" + text + "'");
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used != item.size() || !std::isfinite(v)) {
      throw ParseError("malformed number '" + item + "' in list '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("config: expected an object");
  RunConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    auto str = [&]() {
      if (!v.is_string()) throw ParseError("config/" + key + ": expected a string");
      return v.get<std::string>();
    };
    if (key == "command") {
      cfg.command = command_from_string(str());
    } else if (key == "input") {
      cfg.input = str();
    } else if (key == "output") {
      cfg.output = str();
    } else if (key == "fixtures") {
      cfg.fixture_dir = str();
    } else if (key == "tol_gap") {
      cfg.tol_gap = json_number(v, key);
    } else if (key == "tol_ac") {
      cfg.tol_ac = json_number(v, key);
    } else if (key == "seed") {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ParseError("config/seed: expected a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "schedule") {
      cfg.schedule = json_list(v, key);
    } else if (key == "at") {
      cfg.at = json_list(v, key);
    } else if (key == "sweep") {
      cfg.sweep = json_list(v, key);
    } else {
      throw ParseError("config/" + key + ": unknown key");
    }
  }
  return cfg;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string emit_table(const std::vector<TableRow>& rows) {
  std::string out = "fixture,relaxed_energy,dual_value,gap,ac_residual,singular_residual,verdict";
  if (!rows.empty()) {
    for (const auto& [key, value] : rows.front().extra) out += "," + key;
  }
  out += "\n";
  auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : "n-a"; };
  for (const auto& r : rows) {
    out += r.fixture + "," + num(r.relaxed_energy) + "," + num(r.dual_value) + "," + num(r.gap) +
           "," + num(r.ac_residual) + "," + num(r.singular_residual) + "," +
           (r.verdict.empty() ? "n-a" : r.verdict);
    for (const auto& [key, value] : r.extra) out += "," + value;
    out += "\n";
  }
  return out;
}

void write_atomically(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << content;
    out.close();
    if (!out) throw ParseError(path + ": write failed");
  }
  fs::rename(tmp, target);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.schedule.size() < 4) throw ParseError("--schedule needs at least 4 radii");
    const std::vector<ProblemFile> files = load_inputs(config);
    std::vector<TableRow> rows;
    Json reports = Json::array();
    bool failed = false;
    for (const auto& file : files) {
      Item item = dispatch(file, config);
      for (const auto& r : item.rows) failed = failed || r.verdict == "fail";
      item.report["fixture"] = file.problem.id();
      reports.push_back(std::move(item.report));
      rows.insert(rows.end(), item.rows.begin(), item.rows.end());
    }
    std::string text;
    if (ends_with(config.output, ".csv")) {
      text = emit_table(rows);
    } else {
      text = dump_json(Json{{"schema", kSchema},
                            {"command", to_string(config.command)},
                            {"reports", reports}});
    }
    if (config.output.empty()) {
      out << text;
    } else {
      write_atomically(config.output, text);
    }
    return failed ? 2 : 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mdual::cli
