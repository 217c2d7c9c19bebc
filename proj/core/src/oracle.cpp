#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <map>

#include "mdual/errors.hpp"
#include "mdual/primal_dual.hpp"

namespace mdual {

namespace {

// Visits every point of a tensor grid with `points` nodes per axis on
// [center - half, center + half] and keeps the maximizer of `score`.
template <class Score>
void scan_box(const Vector& center, const Vector& half, int points, Score&& score,
              double& best_value, Vector& best_coords, long long& evaluations) {
  const int d = static_cast<int>(center.size());
  std::vector<int> idx(d, 0);
  Vector c(d);
  while (true) {
    for (int k = 0; k < d; ++k) {
      c[k] = center[k] - half[k] + (2.0 * half[k] * idx[k]) / (points - 1);
    }
    const double v = score(c);
    ++evaluations;
    if (v > best_value) {
      best_value = v;
      best_coords = c;
    }
    int k = 0;
    for (; k < d; ++k) {
      if (++idx[k] < points) break;
      idx[k] = 0;
    }
    if (k == d) break;
  }
}

template <class Score>
void scan_with_refinement(int dofs, double radius, const OracleOptions& opts, Score&& score,
                          double& best_value, Vector& best_coords, long long& evaluations) {
  const Vector half = Vector::Constant(dofs, radius);
  best_value = -std::numeric_limits<double>::infinity();
  best_coords = Vector::Zero(dofs);
  scan_box(Vector::Zero(dofs), half, opts.points, score, best_value, best_coords, evaluations);
  if (!std::isfinite(best_value)) return;
  // One pass at ten times the resolution: +-1 coarse spacing.
  const double coarse = 2.0 * radius / (opts.points - 1);
  const Vector center = best_coords;
  scan_box(center, Vector::Constant(dofs, coarse), opts.refine_points, score, best_value,
           best_coords, evaluations);
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m, double tol) {
  if (m.cols() == 0) return m;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > tol * std::max(1.0, s[0])) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

}  // namespace

OracleResult brute_force_primal(const Problem& p, const OracleOptions& opts) {
  const Eigen::MatrixXd& k = p.kernel();
  const int dofs = static_cast<int>(k.cols());
  if (dofs > opts.max_dofs) {
    throw TooLarge("primal has " + std::to_string(dofs) + " degrees of freedom; the scan " +
                   "handles at most " + std::to_string(opts.max_dofs));
  }
  OracleResult out;
  const Vector& u0 = p.u0();
  if (dofs == 0) {
    out.value = primal_energy(p, u0);
    out.argument = u0;
    out.evaluations = 1;
    return out;
  }
  const double f0 = primal_energy(p, u0);
  const double m = p.f().growth_constant();
  const double radius = (m * f0 + p.volume()) / p.dx() + u0.norm();

  Vector u(u0.size());
  auto score = [&](const Vector& c) {
    u.noalias() = k * c;
    u += u0;
    return -primal_energy(p, u);
  };
  double best = 0.0;
  scan_with_refinement(dofs, radius, opts, score, best, out.coords, out.evaluations);
  out.value = -best;
  out.argument = p.point(out.coords);
  return out;
}

OracleResult brute_force_dual(const Problem& p, const OracleOptions& opts,
                              const std::optional<Eigen::MatrixXd>& subspace) {
  const Eigen::MatrixXd a = p.op().dense();
  Eigen::MatrixXd basis;
  if (subspace) {
    if (subspace->rows() != a.rows()) throw DimensionMismatch("subspace has the wrong size");
    basis = orthonormal_columns(*subspace, 1e-12);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (s[j] > 1e-10 * s[0] && s[j] > 0.0) ++rank;
    }
    basis = svd.matrixU().leftCols(rank);
  }
  const int dofs = static_cast<int>(basis.cols());
  if (dofs > opts.max_dofs) {
    throw TooLarge("dual has " + std::to_string(dofs) + " degrees of freedom; the scan " +
                   "handles at most " + std::to_string(opts.max_dofs));
  }
  OracleResult out;
  if (dofs == 0) {
    out.argument = Vector::Zero(a.rows());
    out.value = dual_energy(p, out.argument, opts.conj).value();
    out.evaluations = 1;
    return out;
  }
  const Eigen::MatrixXd g = a.transpose() * basis;
  Eigen::BDCSVD<Eigen::MatrixXd> gsvd(g);
  const double smin = gsvd.singularValues()[dofs - 1];
  if (!(smin > 0.0)) throw DomainError("dual subspace meets ker A*");
  const double m = p.f().growth_constant();
  const double radius = std::sqrt(static_cast<double>(p.cells())) * m / smin;
  const Vector bt = basis.transpose() * p.tau();
  const int n = p.components();
  const ConvexIntegrand& f = p.f();

  Vector q(g.rows());
  auto score = [&](const Vector& c) {
    q.noalias() = g * c;
    double sum = 0.0;
    for (int cell = 0; cell < p.cells(); ++cell) {
      const auto qc = q.segment(cell * n, n);
      if (qc.norm() > m + opts.conj.infinity_margin) {
        return -std::numeric_limits<double>::infinity();
      }
      const ExtendedReal v = conjugate(f, p.center(cell), qc, opts.conj);
      if (v.is_plus_infinity()) return -std::numeric_limits<double>::infinity();
      sum += v.value();
    }
    return p.dx() * (c.dot(bt) - sum);
  };
  scan_with_refinement(dofs, radius, opts, score, out.value, out.coords, out.evaluations);
  out.argument = basis * out.coords;
  return out;
}

Eigen::MatrixXd level_set_reduction(const Problem& p, double tol) {
  const int n = p.components();
  const Vector& u0 = p.u0();
  // Group cells by their u0 value.
  std::vector<int> level(p.cells(), -1);
  std::vector<Vector> values;
  for (int c = 0; c < p.cells(); ++c) {
    const Vector v = u0.segment(c * n, n);
    for (size_t l = 0; l < values.size(); ++l) {
      if ((values[l] - v).lpNorm<Eigen::Infinity>() <= tol * (1.0 + v.lpNorm<Eigen::Infinity>())) {
        level[c] = static_cast<int>(l);
        break;
      }
    }
    if (level[c] < 0) {
      level[c] = static_cast<int>(values.size());
      values.push_back(v);
    }
  }
  const int levels = static_cast<int>(values.size());
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(u0.size(), static_cast<Eigen::Index>(levels) * n);
  for (int c = 0; c < p.cells(); ++c) {
    for (int j = 0; j < n; ++j) e(c * n + j, level[c] * n + j) = 1.0;
  }
  // Level-wise constant fields orthogonal to ker A, i.e. inside im A*.
  Eigen::MatrixXd constrained = e;
  const Eigen::MatrixXd& k = p.kernel();
  if (k.cols() > 0) {
    const Eigen::MatrixXd kt_e = k.transpose() * e;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(kt_e, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (s[j] > 1e-10 * std::max(1.0, s[0])) ++rank;
    }
    constrained = e * svd.matrixV().rightCols(e.cols() - rank);
  }
  // Map back through the pseudo-inverse of A*, which lands in im A.
  const Eigen::MatrixXd at = p.op().dense().transpose();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(at);
  cod.setThreshold(1e-10);
  return orthonormal_columns(cod.solve(constrained), 1e-10);
}

}  // namespace mdual
