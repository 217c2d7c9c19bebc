#include <cmath>
#include <sstream>

#include "mdual/errors.hpp"
#include "mdual/primal_dual.hpp"

namespace mdual {

namespace {

double l1_norm(const Problem& p, const Vector& u) {
  const int n = p.components();
  double acc = 0.0;
  for (int c = 0; c < p.cells(); ++c) acc += u.segment(c * n, n).norm();
  return acc * p.dx();
}

// Minimizes the convex function phi over the line t -> u + t d. Returns the
// step, 0 when no decrease is found.
template <class Phi>
double line_minimize(Phi&& phi, double scale) {
  const double f0 = phi(0.0);
  double dir = 1.0;
  double s = 1e-6 * scale;
  if (!(phi(s) < f0)) {
    dir = -1.0;
    if (!(phi(-s) < f0)) return 0.0;
  }
  // Expand until the value rises.
  double a = 0.0;
  double b = s;
  double fb = phi(dir * b);
  for (int it = 0; it < 80; ++it) {
    const double c = 2.0 * b;
    const double fc = phi(dir * c);
    if (fc >= fb) {
      b = c;
      break;
    }
    a = b;
    b = c;
    fb = fc;
  }
  // Golden section on [a, b] in the chosen direction.
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = a;
  double hi = b;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = phi(dir * x1);
  double f2 = phi(dir * x2);
  for (int it = 0; it < 100 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = phi(dir * x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = phi(dir * x2);
    }
  }
  const double t = f1 <= f2 ? x1 : x2;
  return phi(dir * t) < f0 ? dir * t : 0.0;
}

}  // namespace

EkelandResult ekeland_certificate(const Problem& p, const Vector& ubar, double epsilon,
                                  std::optional<double> lower_bound) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!p.f().differentiable()) {
    throw NotDifferentiable(p.f().name() + " is not differentiable; mollify it first");
  }
  if (ubar.size() != p.op().cols()) throw DimensionMismatch("ubar has the wrong size");
  const double scale = std::max(1.0, p.tau().norm());
  if ((p.op().apply(ubar) - p.tau()).norm() > 1e-8 * scale) {
    throw Infeasible("ubar does not satisfy A u = tau");
  }

  const double root = std::sqrt(epsilon);
  const Eigen::MatrixXd& k = p.kernel();
  EkelandReport rep;
  rep.epsilon = epsilon;
  rep.bound = root;
  rep.energy_ubar = primal_energy(p, ubar);
  if (lower_bound) {
    rep.precondition_verified = rep.energy_ubar <= *lower_bound + epsilon;
    if (!rep.precondition_verified) {
      rep.warning = "F[ubar] exceeds the lower bound by more than epsilon";
    }
  } else {
    rep.warning = "no lower bound supplied; F[ubar] <= inf + epsilon is unverified";
  }

  const int max_recenter = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / epsilon))));
  Vector center = ubar;
  double f_center = rep.energy_ubar;
  for (int round = 0; round < max_recenter && k.cols() > 0; ++round) {
    auto penalized = [&](const Vector& u) {
      return primal_energy(p, u) + root * l1_norm(p, u - center);
    };
    Vector u = center;
    double g = f_center;
    const double step_scale = 1.0 + u.lpNorm<Eigen::Infinity>();
    for (int sweep = 0; sweep < 200; ++sweep) {
      const double before = g;
      std::vector<Vector> dirs;
      for (Eigen::Index j = 0; j < k.cols(); ++j) dirs.push_back(k.col(j));
      const Vector grad = k.transpose() * primal_subgradient(p, u);
      if (grad.norm() > 0.0) dirs.push_back(k * (grad / grad.norm()));
      for (const Vector& d : dirs) {
        auto phi = [&](double t) { return penalized(u + t * d); };
        const double t = line_minimize(phi, step_scale);
        if (t != 0.0) {
          u += t * d;
          g = penalized(u);
        }
      }
      if (before - g <= 1e-15 * (1.0 + std::abs(before))) break;
    }
    if (g < f_center - 1e-15 * (1.0 + std::abs(f_center))) {
      center = u;
      f_center = primal_energy(p, u);
      ++rep.recenterings;
    } else {
      break;
    }
  }

  EkelandResult out;
  out.uhat = center;
  const int n = p.components();
  out.vstar.resize(center.size());
  for (int c = 0; c < p.cells(); ++c) {
    out.vstar.segment(c * n, n) = subgradient(p.f(), p.center(c), center.segment(c * n, n));
  }
  rep.energy_uhat = f_center;
  rep.l1_distance = l1_norm(p, center - ubar);
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    const Vector eta = k.col(j);
    const double pairing = std::abs(out.vstar.dot(eta)) * p.dx();
    rep.kernel_pairing = std::max(rep.kernel_pairing, pairing / l1_norm(p, eta));
  }
  rep.energy_ok = rep.energy_uhat < rep.energy_ubar + 2.0 * epsilon;
  rep.distance_ok = rep.l1_distance <= root * (1.0 + 1e-12);
  rep.pairing_ok = rep.kernel_pairing <= root * (1.0 + 1e-9);
  out.report = rep;
  if (!rep.pass()) {
    std::ostringstream os;
    os << "bounds failed for epsilon " << epsilon << ": energy " << rep.energy_uhat << " vs "
       << rep.energy_ubar + 2.0 * epsilon << ", L1 distance " << rep.l1_distance
       << ", kernel pairing " << rep.kernel_pairing << " vs sqrt(epsilon) " << root;
    throw CertificateFailed(os.str());
  }
  return out;
}

}  // namespace mdual
