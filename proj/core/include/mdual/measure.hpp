#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mdual/grid.hpp"
#include "mdual/integrand.hpp"

namespace mdual {

/// Point mass located at a cell center.
struct Atom {
  int cell = 0;
  Vector mass;
};

/// R^N-valued measure on a grid: a cellwise constant density (the part
/// absolutely continuous w.r.t. Lebesgue) plus atoms (the singular part).
/// Grid functions are flat vectors indexed cell * N + component.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// Zero measure.
  DiscreteMeasure(Grid grid, int components);
  /// Atoms sharing a cell are merged by vector addition; atoms are kept
  /// sorted by cell.
  DiscreteMeasure(Grid grid, int components, Vector density, std::vector<Atom> atoms = {});

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  const Vector& density() const { return density_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool atom_free() const { return atoms_.empty(); }

  auto density_at(int cell) const { return density_.segment(cell * components_, components_); }
  /// Singular mass vector in `cell` (zero when there is no atom there).
  Vector atom_at(int cell) const;
  /// Total mass vector of `cell`: density * volume + atom.
  Vector cell_mass(int cell) const;

  DiscreteMeasure operator+(const DiscreteMeasure& other) const;
  DiscreteMeasure operator-(const DiscreteMeasure& other) const;
  DiscreteMeasure operator*(double s) const;

 private:
  Grid grid_;
  int components_ = 1;
  Vector density_;
  std::vector<Atom> atoms_;
};

/// Subset of grid cells. The default region is the whole grid.
class Region {
 public:
  Region() = default;
  static Region all() { return Region(); }
  static Region cells(std::vector<int> cells);
  /// Cells begin, ..., end - 1.
  static Region range(int begin, int end);

  bool is_all() const { return !cells_; }
  bool contains(int cell) const;
  /// Cells of the region in increasing order, for a grid of `count` cells.
  std::vector<int> list(int count) const;

 private:
  std::optional<std::vector<int>> cells_;
};

/// |mu|(region)
double total_variation(const DiscreteMeasure& mu, const Region& region = {});
/// <mu>(region) = sum sqrt(1 + |density|^2) dx + sum |atom|.
double area_functional(const DiscreteMeasure& mu, const Region& region = {});
/// sum phi . density dx + sum phi(atom cell) . atom, with phi a grid function.
double weak_star_pair(const DiscreteMeasure& mu, const Vector& phi);

/// Convolution with the tensorized (1 - s^2)^3 bump of half-width delta.
/// The discrete kernel is renormalized per source cell so total mass is
/// preserved exactly; the result has no atoms. Requires delta >= cell width.
DiscreteMeasure mollify_measure(const DiscreteMeasure& mu, double delta);
/// Spreads only the atoms with the same kernel and keeps the density.
DiscreteMeasure mollify_atoms(const DiscreteMeasure& mu, double delta);

/// Test functions {e_c, x_k e_c, sin(2 pi x_k / L_k) e_c} for every
/// component c and axis k.
std::vector<Vector> default_panel(const Grid& grid, int components);

/// int_region f(x, density) dx + sum_atoms |m| f^inf(x, m / |m|).
/// Atoms with |m| < 1e-14 contribute nothing.
double relaxed_integral(const ConvexIntegrand& f, const DiscreteMeasure& mu,
                        const Region& region = {});

struct SequenceTolerances {
  double weak = 1e-3;
  double area = 1e-3;
  double mass = 1e-3;
};

struct MeasureSequenceReport {
  /// Per step: max over the panel of |<mu_j, phi> - <mu, phi>|.
  std::vector<double> pairing_error;
  std::vector<double> area;
  std::vector<double> mass;
  double limit_area = 0.0;
  double limit_mass = 0.0;
  /// area_strict implies strict implies weak_star.
  bool weak_star = false;
  bool strict = false;
  bool area_strict = false;
};

/// Weak* convergence needs the last pairing error below tol.weak and no
/// larger than the first; strict and area-strict add the mass and area
/// conditions at the last step.
MeasureSequenceReport sequence_diagnostic(const std::vector<DiscreteMeasure>& seq,
                                          const DiscreteMeasure& limit,
                                          const std::vector<Vector>& panel,
                                          const SequenceTolerances& tol = {});

}  // namespace mdual
