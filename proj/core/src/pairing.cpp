#include "mdual/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdual/errors.hpp"

namespace mdual {

namespace {

double cell_sup(const Vector& astar, int n, int cell) {
  return astar.segment(cell * n, n).norm();
}

// Index into mu.atoms() of the atom nearest to each cell.
std::vector<int> nearest_atom(const DiscreteMeasure& mu) {
  const Grid& grid = mu.grid();
  std::vector<int> owner(grid.cell_count(), -1);
  for (int c = 0; c < grid.cell_count(); ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < mu.atoms().size(); ++a) {
      const double d = grid.distance(c, mu.atoms()[a].cell);
      if (d < best) {
        best = d;
        owner[c] = static_cast<int>(a);
      }
    }
  }
  return owner;
}

}  // namespace

PairingMeasure pairing_limit(const DiscreteMeasure& mu, const DualCertificate& cert,
                             const std::vector<double>& schedule, const PairingOptions& opts) {
  const Grid& grid = mu.grid();
  const int n = mu.components();
  const int cells = grid.cell_count();
  if (cert.astar_wstar.size() != mu.density().size()) {
    throw DimensionMismatch("A* w* does not match the measure");
  }
  if (schedule.size() < 4) throw DomainError("pairing schedule needs at least four radii");
  for (size_t j = 0; j < schedule.size(); ++j) {
    if (!(schedule[j] > 0.0) || (j > 0 && !(schedule[j] < schedule[j - 1]))) {
      throw DomainError("pairing schedule must be positive and strictly decreasing");
    }
  }
  const Vector& q = cert.astar_wstar;
  const double dx = grid.cell_volume();
  const auto owner = nearest_atom(mu);
  const size_t atoms = mu.atoms().size();

  PairingMeasure out;
  out.schedule = schedule;
  for (double delta : schedule) {
    const DiscreteMeasure uj = mollify_atoms(mu, delta);
    Vector masses(cells);
    std::vector<double> atom_part(atoms, 0.0);
    for (int c = 0; c < cells; ++c) {
      masses[c] = uj.density_at(c).dot(q.segment(c * n, n)) * dx;
      if (owner[c] >= 0) {
        atom_part[owner[c]] +=
            (uj.density_at(c) - mu.density_at(c)).dot(q.segment(c * n, n)) * dx;
      }
    }
    out.step_cell_masses.push_back(std::move(masses));
    out.step_atom_masses.push_back(std::move(atom_part));
  }

  const double last = schedule.back();
  out.halo.assign(cells, false);
  for (int c = 0; c < cells; ++c) {
    for (const auto& a : mu.atoms()) {
      if (grid.distance(c, a.cell) < opts.halo_factor * last) out.halo[c] = true;
    }
  }

  const size_t jl = schedule.size() - 1;
  const Vector& mj = out.step_cell_masses[jl];
  const Vector& mp = out.step_cell_masses[jl - 1];
  Vector density(cells);
  for (int c = 0; c < cells; ++c) {
    if (out.halo[c]) {
      density[c] = mu.density_at(c).dot(q.segment(c * n, n));
    } else {
      density[c] = mj[c] / dx;
      out.max_change = std::max(out.max_change, std::abs(mj[c] - mp[c]));
    }
  }
  const double r = schedule[jl - 1] / schedule[jl];
  std::vector<Atom> lambda_atoms;
  for (size_t a = 0; a < atoms; ++a) {
    const double sj = out.step_atom_masses[jl][a];
    const double sp = out.step_atom_masses[jl - 1][a];
    out.max_change = std::max(out.max_change, std::abs(sj - sp));
    Vector m(1);
    m[0] = (r * sj - sp) / (r - 1.0);
    lambda_atoms.push_back(Atom{mu.atoms()[a].cell, m});
  }
  out.lambda = DiscreteMeasure(grid, 1, std::move(density), std::move(lambda_atoms));
  out.converged = out.max_change < opts.tol_pair;
  return out;
}

void require_converged(const PairingMeasure& lambda) {
  if (!lambda.converged) {
    throw NotConverged("pairing changed by " + std::to_string(lambda.max_change) +
                       " between the last two mollification radii");
  }
}

PairingBoundsReport verify_pairing_bounds(const PairingMeasure& lambda, const DiscreteMeasure& mu,
                                          const DualCertificate& cert, double tol) {
  const Grid& grid = mu.grid();
  const int n = mu.components();
  const int cells = grid.cell_count();
  const Vector& q = cert.astar_wstar;
  PairingBoundsReport rep;

  auto check_region = [&](const Region& region) {
    double sup = 0.0;
    for (int c : region.list(cells)) sup = std::max(sup, cell_sup(q, n, c));
    const double lhs = total_variation(lambda.lambda, region);
    const double rhs = total_variation(mu, region) * sup;
    ++rep.regions_checked;
    const double excess = lhs - rhs;
    if (excess > tol * (1.0 + rhs)) {
      ++rep.mass_violations;
      rep.worst_mass_excess = std::max(rep.worst_mass_excess, excess);
    }
  };
  for (int width = 1; width < cells; width *= 2) {
    for (int begin = 0; begin < cells; begin += width) {
      check_region(Region::range(begin, std::min(cells, begin + width)));
    }
  }
  check_region(Region::all());

  double sup_all = 0.0;
  for (int c = 0; c < cells; ++c) sup_all = std::max(sup_all, cell_sup(q, n, c));
  const double dx = grid.cell_volume();
  for (int c = 0; c < cells; ++c) {
    const double lam = std::abs(lambda.lambda.density_at(c)[0]);
    const double rho = mu.density_at(c).norm();
    if (rho > 0.0) {
      const double excess = lam / rho - sup_all;
      if (excess > tol * (1.0 + sup_all)) {
        ++rep.density_violations;
        rep.worst_density_excess = std::max(rep.worst_density_excess, excess);
      }
    } else if (lam * dx > tol) {
      ++rep.continuity_violations;
    }
  }
  for (size_t a = 0; a < mu.atoms().size(); ++a) {
    const double m = mu.atoms()[a].mass.norm();
    const double lam = std::abs(lambda.lambda.atoms()[a].mass[0]);
    if (m > 0.0) {
      const double excess = lam / m - sup_all;
      if (excess > tol * (1.0 + sup_all)) {
        ++rep.density_violations;
        rep.worst_density_excess = std::max(rep.worst_density_excess, excess);
      }
    } else if (lam > tol) {
      ++rep.continuity_violations;
    }
  }
  return rep;
}

DensityReport density_characterization(const PairingMeasure& lambda, const DiscreteMeasure& mu,
                                       const DualCertificate& cert, const ConvexIntegrand& f,
                                       const DensityOptions& opts) {
  if (!cert.r_value.is_finite()) {
    throw DomainError("density characterization needs a certificate with R[w*] > -inf");
  }
  const Grid& grid = mu.grid();
  const int n = mu.components();
  const Vector& q = cert.astar_wstar;
  DensityReport rep;
  for (int c = 0; c < grid.cell_count(); ++c) {
    if (lambda.halo[c]) {
      ++rep.halo_cells;
      continue;
    }
    ++rep.cells_tested;
    const double expected = mu.density_at(c).dot(q.segment(c * n, n));
    rep.ac_max_error =
        std::max(rep.ac_max_error, std::abs(lambda.lambda.density_at(c)[0] - expected));
  }
  if (rep.cells_tested == 0) {
    throw HaloTooWide("every cell lies within the atom halo; refine the schedule");
  }
  rep.ac_ok = rep.ac_max_error <= opts.tol_ac;
  rep.singular_max_excess = -std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < mu.atoms().size(); ++a) {
    const Atom& atom = mu.atoms()[a];
    const double m = atom.mass.norm();
    if (m < 1e-14) continue;
    const Vector polar = atom.mass / m;
    const double dens = lambda.lambda.atoms()[a].mass[0] / m;
    const double bound = recession(f, grid.center(atom.cell), polar);
    rep.singular_max_excess = std::max(rep.singular_max_excess, dens - bound);
    const double strict = polar.dot(q.segment(atom.cell * n, n));
    rep.strict_max_error = std::max(rep.strict_max_error, std::abs(dens - strict));
  }
  rep.singular_ok = rep.singular_max_excess <= opts.tol_sing;
  if (!std::isfinite(rep.singular_max_excess)) rep.singular_max_excess = 0.0;
  if (opts.strict) rep.strict_ok = rep.strict_max_error <= opts.tol_sing;
  return rep;
}

OptimalityReport optimality_check(const Problem& p, const DiscreteMeasure& mu,
                                  const DualCertificate& cert, const OptimalityOptions& opts) {
  const double fbar = relaxed_energy(p, mu);
  const int n = p.components();
  const Vector& q = cert.astar_wstar;
  if (q.size() != mu.density().size()) throw DimensionMismatch("certificate has the wrong size");
  OptimalityReport rep;
  rep.cell_residuals.resize(p.cells());
  for (int c = 0; c < p.cells(); ++c) {
    const auto rho = mu.density_at(c);
    const auto qc = q.segment(c * n, n);
    const ExtendedReal conj = conjugate(p.f(), p.center(c), qc);
    if (conj.is_plus_infinity()) {
      rep.cell_residuals[c] = std::numeric_limits<double>::infinity();
    } else {
      rep.cell_residuals[c] =
          std::abs(p.f()(p.center(c), rho) + conj.value() - rho.dot(qc));
    }
    rep.ac_residual = std::max(rep.ac_residual, rep.cell_residuals[c]);
  }

  if (!mu.atom_free()) {
    const PairingMeasure lambda = pairing_limit(mu, cert, opts.schedule, opts.pairing);
    rep.pairing_converged = lambda.converged;
    for (size_t a = 0; a < mu.atoms().size(); ++a) {
      const Atom& atom = mu.atoms()[a];
      const double m = atom.mass.norm();
      double residual = 0.0;
      if (m >= 1e-14) {
        const double dens = lambda.lambda.atoms()[a].mass[0] / m;
        residual = std::abs(dens - recession(p.f(), p.center(atom.cell), atom.mass / m));
      }
      rep.atom_residuals.push_back(residual);
      rep.singular_residual = std::max(rep.singular_residual, residual);
    }
    if (!lambda.converged) rep.note = "pairing did not converge over the schedule";
  }

  if (cert.r_value.is_finite()) {
    rep.gap = fbar - cert.r_value.value();
  } else {
    rep.gap = std::numeric_limits<double>::infinity();
    rep.note = "certificate lies outside dom R (R = -inf)";
  }
  rep.ac_ok = rep.ac_residual <= opts.tol_ac;
  rep.singular_ok = rep.singular_residual <= opts.tol_sing;
  rep.gap_ok = rep.gap <= opts.tol_gap;
  rep.pass = rep.ac_ok && rep.singular_ok && rep.gap_ok && rep.pairing_converged;
  return rep;
}

MinimizingSequenceReport minimizing_sequence_diagnostic(const Problem& p,
                                                        const std::vector<Vector>& seq,
                                                        const DiscreteMeasure& mu,
                                                        const MinimizingSequenceOptions& opts) {
  if (seq.empty()) throw DomainError("minimizing sequence is empty");
  const Grid& grid = p.grid();
  const int n = p.components();
  const double scale = std::max(1.0, p.tau().norm());
  MinimizingSequenceReport rep;

  // Energy measure of the limit.
  Vector limit_density(p.cells());
  for (int c = 0; c < p.cells(); ++c) limit_density[c] = p.f()(p.center(c), mu.density_at(c));
  std::vector<Atom> limit_atoms;
  for (const auto& a : mu.atoms()) {
    const double m = a.mass.norm();
    Vector e(1);
    e[0] = m < 1e-14 ? 0.0 : m * recession(p.f(), p.center(a.cell), a.mass / m);
    limit_atoms.push_back(Atom{a.cell, e});
  }
  const DiscreteMeasure limit(grid, 1, limit_density, limit_atoms);
  const double limit_energy = total_variation(limit);
  const auto panel = default_panel(grid, 1);

  for (const Vector& u : seq) {
    if ((p.op().apply(u) - p.tau()).norm() > 1e-8 * scale) {
      throw Infeasible("sequence element violates A u = tau");
    }
    Vector e(p.cells());
    for (int c = 0; c < p.cells(); ++c) e[c] = p.f()(p.center(c), u.segment(c * n, n));
    const DiscreteMeasure em(grid, 1, e);
    double err = 0.0;
    for (const auto& phi : panel) {
      err = std::max(err, std::abs(weak_star_pair(em, phi) - weak_star_pair(limit, phi)));
    }
    rep.panel_errors.push_back(err);
    rep.energies.push_back(e.sum() * p.dx());
  }
  for (size_t j = 1; j < rep.energies.size(); ++j) {
    if (rep.energies[j] > rep.energies[j - 1] + 1e-9) rep.nonincreasing = false;
  }
  if (!rep.nonincreasing) {
    rep.warning = "energies increase along the sequence; not a minimizing sequence";
  } else if (std::abs(rep.energies.back() - limit_energy) > opts.tol) {
    rep.warning = "energies do not approach the relaxed energy of the limit";
  }
  rep.energy_converged = rep.panel_errors.back() < opts.tol &&
                         rep.panel_errors.back() <= rep.panel_errors.front();

  const bool check = opts.area_strict_check.value_or(p.f().name() == "area");
  if (check && seq.size() >= 3) {
    std::vector<DiscreteMeasure> measures;
    for (const Vector& u : seq) measures.push_back(p.as_measure(u));
    rep.area_strict_checked = true;
    rep.area_strict = sequence_diagnostic(measures, mu, default_panel(grid, n), opts.sequence_tol);
  }
  return rep;
}

}  // namespace mdual
