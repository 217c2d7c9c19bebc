#include "mdual/primal_dual.hpp"

#include <Eigen/QR>

#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "mdual/errors.hpp"

namespace mdual {

namespace {

// Largest s in [0, 1] with s * A* w inside dom f* at every cell, found by
// bisection after a first cut to the slab |A* w| <= M.
Vector scale_into_domain(const Problem& p, const Vector& w, const ConjugateOptions& conj) {
  const int n = p.components();
  const ConvexIntegrand& f = p.f();
  const Vector a = p.op().adjoint(w);
  auto inside = [&](double s) {
    for (int c = 0; c < p.cells(); ++c) {
      const Vector q = s * a.segment(c * n, n);
      if (conjugate(f, p.center(c), q, conj).is_plus_infinity()) return false;
    }
    return true;
  };
  if (inside(1.0)) return w;
  double peak = 0.0;
  for (int c = 0; c < p.cells(); ++c) peak = std::max(peak, a.segment(c * n, n).norm());
  double hi = std::min(1.0, f.growth_constant() / peak);
  if (inside(hi)) return hi * w;
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inside(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo * w;
}

struct DualPoint {
  Vector w;
  ExtendedReal value;
  Vector ascent;  // Euclidean supergradient of R at w
};

DualPoint evaluate_dual(const Problem& p, const Vector& w, const ConjugateOptions& conj) {
  const int n = p.components();
  const Vector a = p.op().adjoint(w);
  Vector z(a.size());
  double sum = 0.0;
  DualPoint out{w, ExtendedReal::minus_infinity(), Vector()};
  for (int c = 0; c < p.cells(); ++c) {
    const auto res = conjugate_with_argmax(p.f(), p.center(c), a.segment(c * n, n), conj);
    if (res.value.is_plus_infinity()) return out;
    sum += res.value.value();
    z.segment(c * n, n) = res.argmax;
  }
  out.value = p.dx() * (w.dot(p.tau()) - sum);
  out.ascent = p.dx() * (p.tau() - p.op().apply(z));
  return out;
}

Vector minimal_norm_preimage(const Problem& p, const Vector& target) {
  const Eigen::MatrixXd at = p.op().dense().transpose();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(at);
  cod.setThreshold(1e-10);
  return cod.solve(target);
}

}  // namespace

DualCertificate make_certificate(const Problem& p, Vector wstar, const ConjugateOptions& conj) {
  if (wstar.size() != p.op().rows()) {
    throw DimensionMismatch("w* has " + std::to_string(wstar.size()) + " entries, expected " +
                            std::to_string(p.op().rows()));
  }
  DualCertificate cert;
  cert.astar_wstar = p.op().adjoint(wstar);
  cert.r_value = dual_energy(p, wstar, conj);
  cert.wstar = std::move(wstar);
  return cert;
}

double primal_energy(const Problem& p, const Vector& u) {
  if (u.size() != p.op().cols()) throw DimensionMismatch("grid function has the wrong size");
  const int n = p.components();
  double acc = 0.0;
  for (int c = 0; c < p.cells(); ++c) acc += p.f()(p.center(c), u.segment(c * n, n));
  return acc * p.dx();
}

Vector primal_subgradient(const Problem& p, const Vector& u) {
  const int n = p.components();
  Vector g(u.size());
  for (int c = 0; c < p.cells(); ++c) {
    g.segment(c * n, n) = subgradient_element(p.f(), p.center(c), u.segment(c * n, n));
  }
  return g * p.dx();
}

double relaxed_energy(const Problem& p, const DiscreteMeasure& mu, double tol_ker) {
  if (mu.components() != p.components() || !(mu.grid() == p.grid())) {
    throw DimensionMismatch("measure does not live on the problem's grid");
  }
  const auto res = apply_to_measure(p.op(), mu - p.as_measure(p.u0()), tol_ker);
  if (!res.in_kernel) {
    throw Infeasible("measure violates the constraint: residual " +
                     std::to_string(res.residual) + " exceeds " + std::to_string(res.tolerance));
  }
  return relaxed_integral(p.f(), mu);
}

ExtendedReal dual_energy(const Problem& p, const Vector& wstar, const ConjugateOptions& conj) {
  const int n = p.components();
  const Vector a = p.op().adjoint(wstar);
  double sum = 0.0;
  for (int c = 0; c < p.cells(); ++c) {
    const ExtendedReal v = conjugate(p.f(), p.center(c), a.segment(c * n, n), conj);
    if (v.is_plus_infinity()) return ExtendedReal::minus_infinity();
    sum += v.value();
  }
  return p.dx() * (wstar.dot(p.tau()) - sum);
}

double lagrangian(const Problem& p, const Vector& u, const Vector& wstar) {
  return primal_energy(p, u) - p.dx() * wstar.dot(p.op().apply(u) - p.tau());
}

// ---------------------------------------------------------------------------

DualCertificate solve_dual(const Problem& p, const DualOptions& opts, DualSolveInfo* info) {
  const ConjugateOptions& conj = opts.conj;
  Vector w0 = opts.initial ? *opts.initial : Vector::Zero(p.op().rows());
  if (w0.size() != p.op().rows()) throw DimensionMismatch("initial w* has the wrong size");
  w0 = scale_into_domain(p, w0, conj);

  DualPoint current = evaluate_dual(p, w0, conj);
  DualPoint best = current;
  const double c0 = p.volume() / (1.0 + p.tau().norm());
  std::deque<double> history;
  int k = 1;
  bool converged = false;
  for (; k <= opts.max_iter; ++k) {
    if (!current.value.is_finite()) break;
    const double gnorm = current.ascent.norm();
    if (gnorm < 1e-15) {
      converged = true;
      break;
    }
    const double step = c0 / std::sqrt(static_cast<double>(k));
    Vector w = scale_into_domain(p, current.w + (step / gnorm) * current.ascent, conj);
    current = evaluate_dual(p, w, conj);
    if (current.value.is_finite() &&
        (!best.value.is_finite() || current.value.value() > best.value.value())) {
      best = current;
    }
    if (best.value.is_finite()) {
      history.push_back(best.value.value());
      if (static_cast<int>(history.size()) > opts.window) {
        const double old = history.front();
        history.pop_front();
        if (best.value.value() - old < opts.tol * (1.0 + std::abs(best.value.value()))) {
          converged = true;
          break;
        }
      }
    }
  }
  if (!best.value.is_finite()) {
    throw Stalled("dual ascent found no point with finite value in " +
                  std::to_string(opts.max_iter) + " iterations");
  }

  // Backtracking ascent from the best iterate; accepts improvements only.
  double t = c0 / std::sqrt(static_cast<double>(std::max(k, 1)));
  for (int it = 0; it < opts.polish_iter; ++it) {
    const double gnorm = best.ascent.norm();
    if (gnorm < 1e-15 || t < 1e-16 * (1.0 + best.w.norm())) break;
    Vector w = scale_into_domain(p, best.w + (t / gnorm) * best.ascent, conj);
    DualPoint trial = evaluate_dual(p, w, conj);
    if (trial.value.is_finite() && trial.value.value() > best.value.value()) {
      best = trial;
      t *= 2.0;
    } else {
      t *= 0.5;
    }
  }
  if (info) {
    info->iterations = std::min(k, opts.max_iter);
    info->converged = converged;
  }
  return make_certificate(p, best.w, conj);
}

DualCertificate certificate_from_primal(const Problem& p, const DiscreteMeasure& mu,
                                        const ConjugateOptions& conj) {
  if (mu.components() != p.components() || !(mu.grid() == p.grid())) {
    throw DimensionMismatch("measure does not live on the problem's grid");
  }
  const int n = p.components();
  Vector q(p.op().cols());
  for (int c = 0; c < p.cells(); ++c) {
    const Vector atom = mu.atom_at(c);
    const double m = atom.norm();
    if (m > 1e-14) {
      // Far along the polar the subgradient approaches one of f^inf.
      q.segment(c * n, n) = subgradient_element(p.f(), p.center(c), (1e8 / m) * atom);
    } else {
      q.segment(c * n, n) = subgradient_element(p.f(), p.center(c), mu.density_at(c));
    }
  }
  const Eigen::MatrixXd& k = p.kernel();
  if (k.cols() > 0) q -= k * (k.transpose() * q);
  Vector w = minimal_norm_preimage(p, q);
  return make_certificate(p, scale_into_domain(p, w, conj), conj);
}

// ---------------------------------------------------------------------------

DiscreteMeasure solve_primal(const Problem& p, const PrimalOptions& opts, PrimalSolveInfo* info) {
  const Eigen::MatrixXd& k = p.kernel();
  const int dofs = static_cast<int>(k.cols());
  Vector c = Vector::Zero(dofs);
  if (opts.seed != 0 && dofs > 0) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, opts.start_spread);
    for (int i = 0; i < dofs; ++i) c[i] = normal(rng);
  }
  auto energy = [&](const Vector& coords) { return primal_energy(p, p.point(coords)); };
  auto gradient = [&](const Vector& coords) -> Vector {
    return k.transpose() * primal_subgradient(p, p.point(coords));
  };

  Vector best = c;
  double best_f = energy(c);
  int iterations = 0;
  if (dofs > 0) {
    const double step0 = opts.step > 0.0
                             ? opts.step
                             : std::max(1.0, p.u0().lpNorm<Eigen::Infinity>()) *
                                   std::sqrt(static_cast<double>(p.cells())) * 0.5;
    for (int it = 1; it <= opts.max_iter; ++it) {
      iterations = it;
      const Vector g = gradient(c);
      const double gn = g.norm();
      if (gn < 1e-14) break;
      c -= (step0 / std::sqrt(static_cast<double>(it)) / gn) * g;
      const double fc = energy(c);
      if (fc < best_f) {
        best_f = fc;
        best = c;
      }
    }
    // Armijo polish from the best iterate; only decreases are accepted, so
    // kinks merely stop it.
    double t = step0 / std::sqrt(static_cast<double>(std::max(iterations, 1)));
    for (int it = 0; it < opts.polish_iter; ++it) {
      const Vector g = gradient(best);
      const double gn2 = g.squaredNorm();
      if (gn2 < 1e-28 || t < 1e-16 * (1.0 + best.norm())) break;
      const Vector trial = best - (t / std::sqrt(gn2)) * g;
      const double ft = energy(trial);
      if (ft <= best_f - 1e-4 * t * std::sqrt(gn2) && ft < best_f) {
        best = trial;
        best_f = ft;
        t *= 2.0;
      } else {
        t *= 0.5;
      }
    }
  }

  const Vector u = p.point(best);
  DiscreteMeasure mu = p.as_measure(u);

  // Singular refinement: move part of a cell's mass into an atom at the
  // same cell when that lowers Fbar by more than atom_tol. Cell masses and
  // hence feasibility are unchanged.
  const int n = p.components();
  Vector density = u;
  std::vector<Atom> atoms;
  int added = 0;
  for (int cell = 0; cell < p.cells(); ++cell) {
    const Vector rho = u.segment(cell * n, n);
    const double r = rho.norm();
    if (r < 1e-12) continue;
    const Vector& x = p.center(cell);
    const double base = p.f()(x, rho) * p.dx();
    const double rec = recession(p.f(), x, rho / r);
    double best_gain = opts.atom_tol;
    double best_theta = 0.0;
    for (double theta : {0.25, 0.5, 0.75, 1.0}) {
      const Vector rest = (1.0 - theta) * rho;
      const double moved = p.f()(x, rest) * p.dx() + theta * r * p.dx() * rec;
      if (base - moved > best_gain) {
        best_gain = base - moved;
        best_theta = theta;
      }
    }
    if (best_theta > 0.0) {
      density.segment(cell * n, n) = (1.0 - best_theta) * rho;
      atoms.push_back(Atom{cell, best_theta * rho * p.dx()});
      ++added;
    }
  }
  if (added > 0) mu = DiscreteMeasure(p.grid(), n, density, atoms);
  if (info) {
    info->iterations = iterations;
    info->energy = relaxed_integral(p.f(), mu);
    info->polished = p.f().differentiable();
    info->atoms_added = added;
  }
  return mu;
}

double duality_gap(const Problem& p, const DiscreteMeasure& mu, const DualCertificate& cert) {
  const double fbar = relaxed_energy(p, mu);
  if (!cert.r_value.is_finite()) return std::numeric_limits<double>::infinity();
  return fbar - cert.r_value.value();
}

SolveReport solve(const Problem& p, const SolveOptions& opts) {
  SolveReport report;
  PrimalSolveInfo pinfo;
  report.primal = solve_primal(p, opts.primal, &pinfo);
  report.primal_iterations = pinfo.iterations;
  report.relaxed_energy = relaxed_energy(p, report.primal);

  DualSolveInfo dinfo;
  DualCertificate best = solve_dual(p, opts.dual, &dinfo);
  report.dual_iterations = dinfo.iterations;
  report.dual_converged = dinfo.converged;
  auto better = [](const DualCertificate& a, const DualCertificate& b) {
    return a.r_value.is_finite() && (!b.r_value.is_finite() || a.r_value > b.r_value);
  };
  const DualCertificate recovered = certificate_from_primal(p, report.primal, opts.dual.conj);
  if (better(recovered, best)) best = recovered;
  if (recovered.r_value.is_finite()) {
    DualOptions warm = opts.dual;
    warm.initial = recovered.wstar;
    DualSolveInfo winfo;
    const DualCertificate warmed = solve_dual(p, warm, &winfo);
    report.dual_iterations += winfo.iterations;
    if (better(warmed, best)) best = warmed;
  }
  report.certificate = best;
  report.gap = duality_gap(p, report.primal, report.certificate);
  return report;
}

Problem mollified_family(const Problem& p, double delta) {
  return p.with_integrand(mollify(p.f(), delta));
}

}  // namespace mdual
