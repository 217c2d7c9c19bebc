#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdual/measure.hpp"
#include "mdual/primal_dual.hpp"

namespace mdual {

struct PairingOptions {
  double tol_pair = 1e-4;
  /// Cells closer than halo_factor * delta_last to an atom form its halo.
  double halo_factor = 2.0;
};

/// Scalar measure lambda, a candidate element of the generalized pairing of
/// mu with A* w*, together with how it was generated.
struct PairingMeasure {
  DiscreteMeasure lambda;
  std::vector<double> schedule;
  /// Per step: the cell masses of (u_j . A* w*) L^d.
  std::vector<Vector> step_cell_masses;
  /// Per step and atom (in mu's atom order): the smeared atom mass paired
  /// with A* w*, summed over the cells nearest that atom.
  std::vector<std::vector<double>> step_atom_masses;
  std::vector<bool> halo;
  double max_change = 0.0;
  bool converged = false;
};

/// u_j = mu with its atoms mollified at radius delta_j (the density is kept,
/// so u_j stays in the affine constraint set and the AC part is resolved
/// exactly). lambda's density is read from the last step outside the atom
/// halos and equals density . A* w* inside them; each atom's mass is the
/// two-point Richardson limit of its smeared pairing. `converged` reports a
/// change below tol_pair between the last two steps; the caller decides
/// whether that is fatal (see require_converged).
PairingMeasure pairing_limit(const DiscreteMeasure& mu, const DualCertificate& cert,
                             const std::vector<double>& schedule,
                             const PairingOptions& opts = {});

/// Throws NotConverged when the pairing did not settle.
void require_converged(const PairingMeasure& lambda);

struct PairingBoundsReport {
  int regions_checked = 0;
  int mass_violations = 0;
  double worst_mass_excess = 0.0;
  int density_violations = 0;
  double worst_density_excess = 0.0;
  /// Cells where |mu| vanishes but lambda does not.
  int continuity_violations = 0;
  bool pass() const {
    return mass_violations == 0 && density_violations == 0 && continuity_violations == 0;
  }
};

/// |lambda|(omega) <= |mu|(omega) |A* w*|_inf(omega) on every cell, every
/// dyadic interval of cell indices and the whole grid, plus the pointwise
/// bound |d lambda / d|mu|| <= |A* w*|_inf.
PairingBoundsReport verify_pairing_bounds(const PairingMeasure& lambda, const DiscreteMeasure& mu,
                                          const DualCertificate& cert, double tol = 1e-9);

struct DensityOptions {
  double tol_ac = 1e-5;
  double tol_sing = 1e-6;
  /// Also require d lambda / d|mu^s| = polar . A* w*(atom cell).
  bool strict = false;
};

struct DensityReport {
  int cells_tested = 0;
  int halo_cells = 0;
  double ac_max_error = 0.0;
  /// max over atoms of d lambda / d|mu^s| - f^inf(x, polar)
  double singular_max_excess = 0.0;
  double strict_max_error = 0.0;
  bool ac_ok = false;
  bool singular_ok = false;
  bool strict_ok = true;
  bool pass() const { return ac_ok && singular_ok && strict_ok; }
};

/// Requires a finite certificate. Throws HaloTooWide when the halo covers
/// every cell.
DensityReport density_characterization(const PairingMeasure& lambda, const DiscreteMeasure& mu,
                                       const DualCertificate& cert, const ConvexIntegrand& f,
                                       const DensityOptions& opts = {});

struct OptimalityOptions {
  double tol_ac = 1e-4;
  double tol_sing = 1e-3;
  double tol_gap = 1e-4;
  std::vector<double> schedule{0.1, 0.05, 0.025, 0.0125};
  PairingOptions pairing;
};

struct OptimalityReport {
  Vector cell_residuals;
  std::vector<double> atom_residuals;
  double ac_residual = 0.0;
  double singular_residual = 0.0;
  double gap = 0.0;
  bool pairing_converged = true;
  bool ac_ok = false;
  bool singular_ok = false;
  bool gap_ok = false;
  bool pass = false;
  std::string note;
};

/// Pointwise extremality relations between mu and w*: the Fenchel equality
/// on the density, lambda's atom density against f^inf(polar), and the gap.
/// An infinite certificate yields gap = +inf and a failing verdict. Throws
/// Infeasible when mu leaves u0 + ker A.
OptimalityReport optimality_check(const Problem& p, const DiscreteMeasure& mu,
                                  const DualCertificate& cert,
                                  const OptimalityOptions& opts = {});

struct MinimizingSequenceOptions {
  double tol = 1e-2;
  /// Default: true for integrands whose name is "area".
  std::optional<bool> area_strict_check;
  SequenceTolerances sequence_tol{1e-2, 1e-2, 1e-2};
};

struct MinimizingSequenceReport {
  std::vector<double> energies;
  std::vector<double> panel_errors;
  bool nonincreasing = true;
  std::string warning;
  bool energy_converged = false;
  bool area_strict_checked = false;
  std::optional<MeasureSequenceReport> area_strict;
  bool pass() const {
    return energy_converged && (!area_strict || area_strict->area_strict);
  }
};

/// Compares f(., u_j) L^d with the energy measure f(x, density) L^d +
/// f^inf(x, polar) |mu^s| on the scalar default panel.
MinimizingSequenceReport minimizing_sequence_diagnostic(
    const Problem& p, const std::vector<Vector>& seq, const DiscreteMeasure& mu,
    const MinimizingSequenceOptions& opts = {});

}  // namespace mdual
