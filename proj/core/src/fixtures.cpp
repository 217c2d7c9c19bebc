#include "mdual/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdual/errors.hpp"
#include "mdual/operator.hpp"

namespace mdual {

namespace {

Json base(const std::string& id, const std::string& description, const Grid& grid,
          int components, Json integrand, Json op, const ConstraintOperator& a, const Vector& u0) {
  return Json{{"schema", kSchema},
              {"id", id},
              {"description", description},
              {"grid", grid_to_json(grid)},
              {"components", components},
              {"integrand", std::move(integrand)},
              {"operator", std::move(op)},
              {"tau", vector_to_json(a.apply(u0))},
              {"u0", vector_to_json(u0)}};
}

// Two cells, gradient_1d periodic: ker A is the constants, so the primal has
// N degrees of freedom and the optimum is u = (d, -d) with d = (a - b) / 2.
Json nogap(const std::string& integrand, int n) {
  const Grid grid = Grid::line(2);
  const auto a = ConstraintOperator::build(OperatorKind::gradient_1d, grid, Boundary::periodic, n);
  Vector u0(2 * n);
  if (n == 2) {
    u0 << 0.6, -0.3, -0.2, 0.5;
  } else {
    u0 << 0.5, -0.2, 0.3, -0.3, 0.4, 0.1;
  }
  const std::string label = integrand.substr(0, integrand.find('('));
  const std::string id = "nogap_" + label + "_N" + std::to_string(n);
  return base(id, "two-cell periodic gradient, kernel of dimension " + std::to_string(n), grid, n,
              integrand, "gradient_1d", a, u0);
}

Json area_1d_16() {
  const Grid grid = Grid::line(16);
  const auto a = ConstraintOperator::build(OperatorKind::gradient_1d, grid);
  Vector u0(16);
  for (int c = 0; c < 16; ++c) u0[c] = c < 5 ? 0.0 : (c < 11 ? 0.5 : -0.25);
  return base("area_1d_16", "area integrand, periodic gradient, three-level u0", grid, 1, "area",
              "gradient_1d", a, u0);
}

Json area_tau0_4() {
  const Grid grid = Grid::line(4);
  const auto a = ConstraintOperator::build(OperatorKind::gradient_1d, grid);
  return base("area_tau0_4", "area integrand with tau = 0; optimum u = 0, w* = 0, value |Omega|",
              grid, 1, "area", "gradient_1d", a, Vector::Zero(4));
}

Json mass_atom(double shift) {
  const Grid grid = Grid::line(128);
  const int atom = 64;
  const double xc = grid.center(atom)[0];
  Vector weight(128);
  for (int c = 0; c < 128; ++c) {
    const double t = grid.center(c)[0] - xc;
    weight[c] = 1.0 + 4.0 * t * t;
  }
  const auto a = ConstraintOperator::mass(grid);
  const Vector u0 = Vector::Ones(128);
  const bool exact = shift == 0.0;
  Json j = base(exact ? "mass_atom_128" : "mass_atom_128_perturbed",
                exact ? "weighted abs with minimum weight at the atom; optimal pair (atom, w* = 1)"
                      : "optimal atom paired with w* shifted by -0.1",
                grid, 1, Json{{"kind", "weighted_abs"}, {"weight", vector_to_json(weight)}}, "mass",
                a, u0);
  Vector m(1);
  m << 1.0;
  j["measure"] = measure_to_json(DiscreteMeasure(grid, 1, Vector::Zero(128), {Atom{atom, m}}));
  Vector w(1);
  w << weight[atom] + shift;
  j["wstar"] = vector_to_json(w);
  return j;
}

Json relax_atom_256() {
  const Grid grid = Grid::line(256);
  const auto a = ConstraintOperator::mass(grid);
  Json j = base("relax_atom_256", "density 1 plus a unit atom; area relaxation sqrt(2) + 1", grid,
                1, "area", "mass", a, Vector::Constant(256, 2.0));
  Vector m(1);
  m << 1.0;
  j["measure"] = measure_to_json(DiscreteMeasure(grid, 1, Vector::Ones(256), {Atom{128, m}}));
  return j;
}

Json oscillation_512() {
  const Grid grid = Grid::line(512);
  const auto a = ConstraintOperator::mass(grid);
  return base("oscillation_512", "zero-mass constraint for the sign(sin) oscillation sequence",
              grid, 1, "area", "mass", a, Vector::Zero(512));
}

Json mollified_abs_4() {
  const Grid grid = Grid::line(4);
  const auto a = ConstraintOperator::build(OperatorKind::gradient_1d, grid);
  Vector u0(4);
  u0 << 0.6, 0.4, 0.5, -0.1;
  return base("mollified_abs_4", "abs mollified at delta = 0.1, periodic gradient", grid, 1,
              Json{{"kind", "mollified"}, {"base", "abs"}, {"delta", 0.1}}, "gradient_1d", a, u0);
}

}  // namespace

std::vector<std::string> fixture_ids() {
  std::vector<std::string> ids;
  for (const char* f : {"abs", "area", "huber"}) {
    for (int n : {2, 3}) ids.push_back(std::string("nogap_") + f + "_N" + std::to_string(n));
  }
  for (const char* id : {"area_1d_16", "area_tau0_4", "mass_atom_128", "mass_atom_128_perturbed",
                         "mollified_abs_4", "oscillation_512", "relax_atom_256"}) {
    ids.emplace_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Json make_fixture(const std::string& id) {
  for (const char* f : {"abs", "area", "huber(0.5)"}) {
    const std::string label(f, std::string(f).find('(') == std::string::npos
                                   ? std::string(f).size()
                                   : std::string(f).find('('));
    for (int n : {2, 3}) {
      if (id == "nogap_" + label + "_N" + std::to_string(n)) return nogap(f, n);
    }
  }
  if (id == "area_1d_16") return area_1d_16();
  if (id == "area_tau0_4") return area_tau0_4();
  if (id == "mass_atom_128") return mass_atom(0.0);
  if (id == "mass_atom_128_perturbed") return mass_atom(-0.1);
  if (id == "mollified_abs_4") return mollified_abs_4();
  if (id == "oscillation_512") return oscillation_512();
  if (id == "relax_atom_256") return relax_atom_256();
  throw DomainError("unknown fixture '" + id + "'");
}

std::vector<std::pair<std::string, Json>> standard_fixtures() {
  std::vector<std::pair<std::string, Json>> out;
  for (const auto& id : fixture_ids()) out.emplace_back(id, make_fixture(id));
  return out;
}

std::vector<Vector> oscillation_sequence(const Grid& grid, int steps) {
  if (grid.dim() != 1) throw DimensionMismatch("oscillation_sequence needs a 1D grid");
  std::vector<Vector> seq;
  for (int k = 0; k < steps; ++k) {
    const double freq = std::ldexp(1.0, k);
    Vector u(grid.cell_count());
    for (int c = 0; c < grid.cell_count(); ++c) {
      const double s = std::sin(2.0 * std::numbers::pi * freq * grid.center(c)[0] / grid.lengths()[0]);
      u[c] = s > 0 ? 1.0 : -1.0;
    }
    seq.push_back(std::move(u));
  }
  return seq;
}

}  // namespace mdual
