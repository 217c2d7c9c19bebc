#include "mdual/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include "mdual/errors.hpp"

namespace mdual {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? std::string("/") : path) + ": " + what);
}

void check_keys(const Json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) known = known || it.key() == a;
    if (!known) fail(path + "/" + it.key(), "unknown key");
  }
}

const Json& require(const Json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing required key");
  return *it;
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "number is not finite");
  return v;
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    // Drop the library's "[json.exception.parse_error.101] parse error at ..." prefix.
    if (auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                     msg);
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_json(os.str(), path);
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

Json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

Json number_to_json(const ExtendedReal& v) { return number_to_json(v.value()); }

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_to_json(v[i]));
  return a;
}

Vector vector_from_json(const Json& j, const std::string& path) {
  as_array(j, path);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_number(j[i], path + "/" + std::to_string(i));
  }
  return v;
}

Grid grid_from_json(const Json& j, const std::string& path) {
  check_keys(j, path, {"dim", "cells", "lengths", "periodic"});
  const int dim = as_int(require(j, path, "dim"), path + "/dim");
  const Json& cells = as_array(require(j, path, "cells"), path + "/cells");
  const Json& lengths = as_array(require(j, path, "lengths"), path + "/lengths");
  const Json& periodic = require(j, path, "periodic");
  if (!periodic.is_boolean()) fail(path + "/periodic", "expected a boolean");
  if (dim < 1 || cells.size() != static_cast<std::size_t>(dim) ||
      lengths.size() != static_cast<std::size_t>(dim)) {
    fail(path, "dim, cells and lengths disagree");
  }
  std::vector<int> extents;
  std::vector<double> ls;
  for (int k = 0; k < dim; ++k) {
    extents.push_back(as_int(cells[k], path + "/cells/" + std::to_string(k)));
    ls.push_back(as_number(lengths[k], path + "/lengths/" + std::to_string(k)));
  }
  try {
    return Grid(extents, ls, periodic.get<bool>());
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Json grid_to_json(const Grid& grid) {
  return Json{{"dim", grid.dim()},
              {"cells", grid.extents()},
              {"lengths", grid.lengths()},
              {"periodic", grid.periodic()}};
}

ConvexIntegrand integrand_from_json(const Json& j, const Grid& grid, int components,
                                    const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "abs") return ConvexIntegrand::abs(components);
    if (name == "area") return ConvexIntegrand::area(components);
    static const std::regex huber(R"(huber\(\s*([-+0-9.eE]+)\s*\))");
    std::smatch m;
    if (std::regex_match(name, m, huber)) {
      double gamma = 0.0;
      try {
        gamma = std::stod(m[1].str());
      } catch (const std::exception&) {
        fail(path, "malformed huber parameter");
      }
      try {
        return ConvexIntegrand::huber(gamma, components);
      } catch (const Error& e) {
        fail(path, e.what());
      }
    }
    fail(path, "unknown integrand '" + name + "'");
  }
  if (!j.is_object()) fail(path, "expected a string or an object");
  const std::string kind = as_string(require(j, path, "kind"), path + "/kind");
  if (kind == "weighted_abs") {
    check_keys(j, path, {"kind", "weight"});
    const Vector w = vector_from_json(require(j, path, "weight"), path + "/weight");
    if (w.size() != grid.cell_count()) fail(path + "/weight", "expected one value per cell");
    try {
      return ConvexIntegrand::weighted_abs(
          SampledField(grid.extents(), grid.lengths(), std::vector<double>(w.begin(), w.end())),
          components);
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  if (kind == "tabulated") {
    check_keys(j, path, {"kind", "points", "M"});
    if (components != 1) fail(path, "tabulated integrands are scalar (components = 1)");
    const Json& pts = as_array(require(j, path, "points"), path + "/points");
    std::vector<std::array<double, 3>> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string pp = path + "/points/" + std::to_string(i);
      if (!pts[i].is_array() || pts[i].size() != 3) fail(pp, "expected [x, z, f]");
      points.push_back({as_number(pts[i][0], pp + "/0"), as_number(pts[i][1], pp + "/1"),
                        as_number(pts[i][2], pp + "/2")});
    }
    std::optional<double> m;
    if (j.contains("M")) m = as_number(j["M"], path + "/M");
    try {
      return ConvexIntegrand::tabulated(points, m);
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  if (kind == "mollified") {
    check_keys(j, path, {"kind", "base", "delta"});
    const ConvexIntegrand base =
        integrand_from_json(require(j, path, "base"), grid, components, path + "/base");
    const double delta = as_number(require(j, path, "delta"), path + "/delta");
    try {
      return mollify(base, delta);
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  fail(path + "/kind", "unknown integrand kind '" + kind + "'");
}

ConstraintOperator operator_from_json(const Json& j, const Grid& grid, int components,
                                      const std::string& path) {
  std::string name;
  Boundary boundary = Boundary::periodic;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else if (j.is_object()) {
    name = as_string(require(j, path, "name"), path + "/name");
    if (name == "custom") {
      check_keys(j, path, {"name", "rows", "cols", "triplets"});
      const int rows = as_int(require(j, path, "rows"), path + "/rows");
      const int cols = as_int(require(j, path, "cols"), path + "/cols");
      if (cols != grid.cell_count() * components) {
        fail(path + "/cols", "must equal cells * components");
      }
      const Json& ts = as_array(require(j, path, "triplets"), path + "/triplets");
      std::vector<ConstraintOperator::Triplet> triplets;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string tp = path + "/triplets/" + std::to_string(i);
        if (!ts[i].is_array() || ts[i].size() != 3) fail(tp, "expected [row, col, value]");
        triplets.emplace_back(as_int(ts[i][0], tp + "/0"), as_int(ts[i][1], tp + "/1"),
                              as_number(ts[i][2], tp + "/2"));
      }
      try {
        return ConstraintOperator::custom(grid, components, rows, triplets);
      } catch (const Error& e) {
        fail(path, e.what());
      }
    }
    check_keys(j, path, {"name", "boundary"});
    if (j.contains("boundary")) {
      try {
        boundary = boundary_from_string(as_string(j["boundary"], path + "/boundary"));
      } catch (const DomainError& e) {
        fail(path + "/boundary", e.what());
      }
    }
  } else {
    fail(path, "expected a string or an object");
  }
  try {
    if (name == "mass") return ConstraintOperator::mass(grid, components);
    return ConstraintOperator::build(operator_kind_from_string(name), grid, boundary, components);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

DiscreteMeasure measure_from_json(const Json& j, const Grid& grid, int components,
                                  const std::string& path) {
  check_keys(j, path, {"grid", "components", "density", "atoms"});
  if (j.contains("grid") && !(grid_from_json(j["grid"], path + "/grid") == grid)) {
    fail(path + "/grid", "does not match the problem grid");
  }
  if (j.contains("components") &&
      as_int(j["components"], path + "/components") != components) {
    fail(path + "/components", "does not match the problem");
  }
  const Json& dens = as_array(require(j, path, "density"), path + "/density");
  if (dens.size() != static_cast<std::size_t>(grid.cell_count())) {
    fail(path + "/density", "expected one entry per cell");
  }
  Vector density(static_cast<Eigen::Index>(grid.cell_count()) * components);
  for (int c = 0; c < grid.cell_count(); ++c) {
    const std::string cp = path + "/density/" + std::to_string(c);
    if (dens[c].is_number() && components == 1) {
      density[c] = as_number(dens[c], cp);
      continue;
    }
    const Vector v = vector_from_json(dens[c], cp);
    if (v.size() != components) fail(cp, "expected " + std::to_string(components) + " values");
    density.segment(c * components, components) = v;
  }
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    const Json& as = as_array(j["atoms"], path + "/atoms");
    for (std::size_t i = 0; i < as.size(); ++i) {
      const std::string ap = path + "/atoms/" + std::to_string(i);
      check_keys(as[i], ap, {"cell", "mass"});
      const int cell = as_int(require(as[i], ap, "cell"), ap + "/cell");
      const Vector mass = vector_from_json(require(as[i], ap, "mass"), ap + "/mass");
      if (cell < 0 || cell >= grid.cell_count()) fail(ap + "/cell", "outside the grid");
      if (mass.size() != components) fail(ap + "/mass", "wrong number of components");
      atoms.push_back(Atom{cell, mass});
    }
  }
  return DiscreteMeasure(grid, components, std::move(density), std::move(atoms));
}

Json measure_to_json(const DiscreteMeasure& mu, bool with_grid) {
  Json j;
  Json dens = Json::array();
  for (int c = 0; c < mu.grid().cell_count(); ++c) dens.push_back(vector_to_json(mu.density_at(c)));
  j["density"] = dens;
  Json atoms = Json::array();
  for (const auto& a : mu.atoms()) atoms.push_back(Json{{"cell", a.cell}, {"mass", vector_to_json(a.mass)}});
  j["atoms"] = atoms;
  if (with_grid) {
    j["grid"] = grid_to_json(mu.grid());
    j["components"] = mu.components();
  }
  return j;
}

ProblemFile problem_file_from_json(const Json& j, const std::string& fallback_id) {
  check_keys(j, "", {"schema", "id", "description", "grid", "components", "integrand",
                     "operator", "tau", "u0", "measure", "wstar"});
  const std::string schema = as_string(require(j, "", "schema"), "/schema");
  if (schema != kSchema) fail("/schema", "expected \"" + std::string(kSchema) + "\"");
  if (j.contains("description")) as_string(j["description"], "/description");
  const std::string id = j.contains("id") ? as_string(j["id"], "/id") : fallback_id;
  const Grid grid = grid_from_json(require(j, "", "grid"));
  const int components = as_int(require(j, "", "components"), "/components");
  if (components < 1) fail("/components", "must be positive");
  ConvexIntegrand f = integrand_from_json(require(j, "", "integrand"), grid, components);
  ConstraintOperator op = operator_from_json(require(j, "", "operator"), grid, components);
  SourceTerm source{vector_from_json(require(j, "", "tau"), "/tau"),
                    vector_from_json(require(j, "", "u0"), "/u0")};
  std::optional<Problem> problem;
  try {
    problem.emplace(std::move(f), std::move(op), std::move(source), id);
  } catch (const DimensionMismatch& e) {
    fail("", e.what());
  } catch (const DomainError& e) {
    fail("", e.what());
  }
  ProblemFile out{*problem, std::nullopt, std::nullopt};
  if (j.contains("measure")) out.measure = measure_from_json(j["measure"], grid, components);
  if (j.contains("wstar")) {
    out.wstar = vector_from_json(j["wstar"], "/wstar");
    if (out.wstar->size() != out.problem.op().rows()) fail("/wstar", "wrong length");
  }
  return out;
}

ProblemFile load_problem_file(const std::string& path) {
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind(".json"); dot != std::string::npos) stem = stem.substr(0, dot);
  const Json j = load_json_file(path);
  try {
    return problem_file_from_json(j, stem);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + std::string(e.what()).substr(std::string("ParseError: ").size()));
  }
}

// ---------------------------------------------------------------------------

Json certificate_to_json(const DualCertificate& cert) {
  return Json{{"wstar", vector_to_json(cert.wstar)},
              {"astar_wstar", vector_to_json(cert.astar_wstar)},
              {"dual_value", number_to_json(cert.r_value)}};
}

Json solve_report_to_json(const SolveReport& r) {
  return Json{{"primal", measure_to_json(r.primal)},
              {"certificate", certificate_to_json(r.certificate)},
              {"relaxed_energy", number_to_json(r.relaxed_energy)},
              {"dual_value", number_to_json(r.certificate.r_value)},
              {"gap", number_to_json(r.gap)},
              {"primal_iterations", r.primal_iterations},
              {"dual_iterations", r.dual_iterations},
              {"dual_converged", r.dual_converged}};
}

Json optimality_report_to_json(const OptimalityReport& r) {
  Json atoms = Json::array();
  for (double v : r.atom_residuals) atoms.push_back(number_to_json(v));
  return Json{{"cell_residuals", vector_to_json(r.cell_residuals)},
              {"atom_residuals", atoms},
              {"ac_residual", number_to_json(r.ac_residual)},
              {"singular_residual", number_to_json(r.singular_residual)},
              {"gap", number_to_json(r.gap)},
              {"pairing_converged", r.pairing_converged},
              {"ac_ok", r.ac_ok},
              {"singular_ok", r.singular_ok},
              {"gap_ok", r.gap_ok},
              {"verdict", r.pass ? "pass" : "fail"},
              {"note", r.note}};
}

Json pairing_to_json(const PairingMeasure& lambda) {
  Json steps = Json::array();
  for (std::size_t s = 0; s < lambda.schedule.size(); ++s) {
    Json atoms = Json::array();
    for (double v : lambda.step_atom_masses[s]) atoms.push_back(number_to_json(v));
    steps.push_back(Json{{"delta", lambda.schedule[s]},
                         {"cell_masses", vector_to_json(lambda.step_cell_masses[s])},
                         {"atom_masses", atoms}});
  }
  return Json{{"lambda", measure_to_json(lambda.lambda)},
              {"steps", steps},
              {"max_change", number_to_json(lambda.max_change)},
              {"converged", lambda.converged}};
}

}  // namespace mdual
