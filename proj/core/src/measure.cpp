#include "mdual/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mdual/errors.hpp"
#include "mdual/quadrature.hpp"

namespace mdual {

DiscreteMeasure::DiscreteMeasure(Grid grid, int components)
    : grid_(std::move(grid)), components_(components) {
  if (components < 1) throw DomainError("measure needs at least one component");
  density_ = Vector::Zero(static_cast<Eigen::Index>(grid_.cell_count()) * components);
}

DiscreteMeasure::DiscreteMeasure(Grid grid, int components, Vector density,
                                 std::vector<Atom> atoms)
    : grid_(std::move(grid)), components_(components), density_(std::move(density)) {
  if (components < 1) throw DomainError("measure needs at least one component");
  const Eigen::Index expected = static_cast<Eigen::Index>(grid_.cell_count()) * components;
  if (density_.size() != expected) {
    throw DimensionMismatch("density has " + std::to_string(density_.size()) +
                            " entries, expected " + std::to_string(expected));
  }
  std::map<int, Vector> merged;
  for (auto& a : atoms) {
    if (a.cell < 0 || a.cell >= grid_.cell_count()) {
      throw DomainError("atom cell " + std::to_string(a.cell) + " outside the grid");
    }
    if (a.mass.size() != components) throw DimensionMismatch("atom mass has wrong size");
    auto it = merged.find(a.cell);
    if (it == merged.end()) {
      merged.emplace(a.cell, a.mass);
    } else {
      it->second += a.mass;
    }
  }
  for (auto& [cell, mass] : merged) atoms_.push_back(Atom{cell, std::move(mass)});
}

Vector DiscreteMeasure::atom_at(int cell) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), cell,
                             [](const Atom& a, int c) { return a.cell < c; });
  if (it != atoms_.end() && it->cell == cell) return it->mass;
  return Vector::Zero(components_);
}

Vector DiscreteMeasure::cell_mass(int cell) const {
  return density_at(cell) * grid_.cell_volume() + atom_at(cell);
}

DiscreteMeasure DiscreteMeasure::operator+(const DiscreteMeasure& other) const {
  if (!(grid_ == other.grid_) || components_ != other.components_) {
    throw DimensionMismatch("measures live on different grids");
  }
  std::vector<Atom> atoms = atoms_;
  atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
  return DiscreteMeasure(grid_, components_, density_ + other.density_, std::move(atoms));
}

DiscreteMeasure DiscreteMeasure::operator-(const DiscreteMeasure& other) const {
  return *this + other * -1.0;
}

DiscreteMeasure DiscreteMeasure::operator*(double s) const {
  std::vector<Atom> atoms = atoms_;
  for (auto& a : atoms) a.mass *= s;
  return DiscreteMeasure(grid_, components_, density_ * s, std::move(atoms));
}

// ---------------------------------------------------------------------------

Region Region::cells(std::vector<int> cells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  Region r;
  r.cells_ = std::move(cells);
  return r;
}

Region Region::range(int begin, int end) {
  std::vector<int> c;
  for (int i = begin; i < end; ++i) c.push_back(i);
  return cells(std::move(c));
}

bool Region::contains(int cell) const {
  return !cells_ || std::binary_search(cells_->begin(), cells_->end(), cell);
}

std::vector<int> Region::list(int count) const {
  if (cells_) return *cells_;
  std::vector<int> all(count);
  for (int i = 0; i < count; ++i) all[i] = i;
  return all;
}

// ---------------------------------------------------------------------------

double total_variation(const DiscreteMeasure& mu, const Region& region) {
  const double dx = mu.grid().cell_volume();
  double acc = 0.0;
  for (int c : region.list(mu.grid().cell_count())) acc += mu.density_at(c).norm() * dx;
  for (const auto& a : mu.atoms()) {
    if (region.contains(a.cell)) acc += a.mass.norm();
  }
  return acc;
}

double area_functional(const DiscreteMeasure& mu, const Region& region) {
  const double dx = mu.grid().cell_volume();
  double acc = 0.0;
  for (int c : region.list(mu.grid().cell_count())) {
    acc += std::sqrt(1.0 + mu.density_at(c).squaredNorm()) * dx;
  }
  for (const auto& a : mu.atoms()) {
    if (region.contains(a.cell)) acc += a.mass.norm();
  }
  return acc;
}

double weak_star_pair(const DiscreteMeasure& mu, const Vector& phi) {
  if (phi.size() != mu.density().size()) {
    throw DimensionMismatch("test function does not match the measure's grid");
  }
  const int n = mu.components();
  double acc = phi.dot(mu.density()) * mu.grid().cell_volume();
  for (const auto& a : mu.atoms()) acc += phi.segment(a.cell * n, n).dot(a.mass);
  return acc;
}

// ---------------------------------------------------------------------------

namespace {

struct Stencil {
  std::vector<std::vector<int>> offsets;
  std::vector<double> weights;
};

Stencil bump_stencil(const Grid& grid, double delta) {
  if (!(delta >= grid.cell_width() * (1.0 - 1e-12))) {
    throw DomainError("mollification radius " + std::to_string(delta) +
                      " is below the cell width " + std::to_string(grid.cell_width()));
  }
  const int d = grid.dim();
  std::vector<int> reach(d);
  for (int k = 0; k < d; ++k) {
    // Offsets with |o| h < delta; the profile vanishes at |o| h = delta.
    reach[k] = static_cast<int>(std::ceil(delta / grid.spacing(k) - 1e-9)) - 1;
    reach[k] = std::max(reach[k], 0);
  }
  Stencil st;
  std::vector<int> o(d);
  for (int k = 0; k < d; ++k) o[k] = -reach[k];
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) w *= bump_profile(o[k] * grid.spacing(k) / delta);
    if (w > 0.0) {
      st.offsets.push_back(o);
      st.weights.push_back(w);
    }
    int k = 0;
    for (; k < d; ++k) {
      if (++o[k] <= reach[k]) break;
      o[k] = -reach[k];
    }
    if (k == d) break;
  }
  return st;
}

// Adds `mass` spread around `source` into `density`.
void spread(const Grid& grid, const Stencil& st, int source, const Vector& mass, int n,
            Vector& density) {
  const auto base = grid.coords(source);
  std::vector<int> targets;
  std::vector<double> weights;
  double total = 0.0;
  std::vector<int> c(base.size());
  for (size_t s = 0; s < st.offsets.size(); ++s) {
    bool inside = true;
    for (size_t k = 0; k < base.size(); ++k) {
      c[k] = base[k] + st.offsets[s][k];
      if (!grid.periodic() && (c[k] < 0 || c[k] >= grid.extents()[k])) inside = false;
    }
    if (!inside) continue;
    targets.push_back(grid.index(c));
    weights.push_back(st.weights[s]);
    total += st.weights[s];
  }
  const double scale = 1.0 / (total * grid.cell_volume());
  for (size_t t = 0; t < targets.size(); ++t) {
    density.segment(targets[t] * n, n) += mass * (weights[t] * scale);
  }
}

}  // namespace

DiscreteMeasure mollify_measure(const DiscreteMeasure& mu, double delta) {
  const Grid& grid = mu.grid();
  const int n = mu.components();
  const Stencil st = bump_stencil(grid, delta);
  Vector out = Vector::Zero(mu.density().size());
  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    const Vector mass = mu.density_at(cell) * grid.cell_volume();
    if (mass.squaredNorm() == 0.0) continue;
    spread(grid, st, cell, mass, n, out);
  }
  for (const auto& a : mu.atoms()) spread(grid, st, a.cell, a.mass, n, out);
  return DiscreteMeasure(grid, n, std::move(out));
}

DiscreteMeasure mollify_atoms(const DiscreteMeasure& mu, double delta) {
  if (mu.atom_free()) return mu;
  const Grid& grid = mu.grid();
  const int n = mu.components();
  const Stencil st = bump_stencil(grid, delta);
  Vector out = mu.density();
  for (const auto& a : mu.atoms()) spread(grid, st, a.cell, a.mass, n, out);
  return DiscreteMeasure(grid, n, std::move(out));
}

std::vector<Vector> default_panel(const Grid& grid, int components) {
  const int cells = grid.cell_count();
  std::vector<Vector> panel;
  for (int c = 0; c < components; ++c) {
    Vector one = Vector::Zero(static_cast<Eigen::Index>(cells) * components);
    for (int i = 0; i < cells; ++i) one[i * components + c] = 1.0;
    panel.push_back(one);
    for (int k = 0; k < grid.dim(); ++k) {
      Vector lin = Vector::Zero(one.size());
      Vector wave = Vector::Zero(one.size());
      for (int i = 0; i < cells; ++i) {
        const double x = grid.center(i)[k];
        lin[i * components + c] = x;
        wave[i * components + c] = std::sin(2.0 * std::numbers::pi * x / grid.lengths()[k]);
      }
      panel.push_back(lin);
      panel.push_back(wave);
    }
  }
  return panel;
}

double relaxed_integral(const ConvexIntegrand& f, const DiscreteMeasure& mu,
                        const Region& region) {
  if (f.dimension() != mu.components()) {
    throw DimensionMismatch("integrand and measure have different component counts");
  }
  const Grid& grid = mu.grid();
  const double dx = grid.cell_volume();
  double acc = 0.0;
  for (int c : region.list(grid.cell_count())) {
    acc += f(grid.center(c), mu.density_at(c)) * dx;
  }
  for (const auto& a : mu.atoms()) {
    if (!region.contains(a.cell)) continue;
    const double m = a.mass.norm();
    if (m < 1e-14) continue;
    acc += m * recession(f, grid.center(a.cell), a.mass / m);
  }
  return acc;
}

MeasureSequenceReport sequence_diagnostic(const std::vector<DiscreteMeasure>& seq,
                                          const DiscreteMeasure& limit,
                                          const std::vector<Vector>& panel,
                                          const SequenceTolerances& tol) {
  if (panel.empty()) throw DomainError("sequence diagnostic needs a nonempty panel");
  if (seq.size() < 3) throw DomainError("sequence diagnostic needs at least three steps");
  MeasureSequenceReport r;
  r.limit_area = area_functional(limit);
  r.limit_mass = total_variation(limit);
  std::vector<double> limit_pair;
  for (const auto& phi : panel) limit_pair.push_back(weak_star_pair(limit, phi));
  for (const auto& mu : seq) {
    double err = 0.0;
    for (size_t k = 0; k < panel.size(); ++k) {
      err = std::max(err, std::abs(weak_star_pair(mu, panel[k]) - limit_pair[k]));
    }
    r.pairing_error.push_back(err);
    r.area.push_back(area_functional(mu));
    r.mass.push_back(total_variation(mu));
  }
  r.weak_star = r.pairing_error.back() < tol.weak &&
                r.pairing_error.back() <= r.pairing_error.front();
  r.strict = r.weak_star && std::abs(r.mass.back() - r.limit_mass) < tol.mass;
  r.area_strict = r.strict && std::abs(r.area.back() - r.limit_area) < tol.area;
  return r;
}

}  // namespace mdual
