#include "mdual/operator.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "mdual/errors.hpp"

namespace mdual {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::gradient_1d: return "gradient_1d";
    case OperatorKind::divergence_2d: return "divergence_2d";
    case OperatorKind::curl_2d: return "curl_2d";
    case OperatorKind::symmetric_gradient_2d: return "symmetric_gradient_2d";
    case OperatorKind::custom: return "custom";
  }
  return "custom";
}

OperatorKind operator_kind_from_string(const std::string& name) {
  for (auto k : {OperatorKind::gradient_1d, OperatorKind::divergence_2d, OperatorKind::curl_2d,
                 OperatorKind::symmetric_gradient_2d, OperatorKind::custom}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown operator '" + name + "'");
}

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "zero"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "zero") return Boundary::zero;
  throw DomainError("unknown boundary rule '" + name + "'");
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Appends coeff * D_axis applied to component `comp` into row `row` of the
// assembled matrix, for the difference based at `cell`.
void add_forward_difference(const Grid& grid, Boundary boundary, int n_comp, int cell,
                            int axis, int comp, int row, double coeff,
                            std::vector<Triplet>& out) {
  const double h = grid.spacing(axis);
  auto c = grid.coords(cell);
  out.emplace_back(row, cell * n_comp + comp, -coeff / h);
  c[axis] += 1;
  if (c[axis] >= grid.extents()[axis]) {
    if (boundary == Boundary::zero) return;
    c[axis] = 0;
  }
  out.emplace_back(row, grid.index(c) * n_comp + comp, coeff / h);
}

}  // namespace

ConstraintOperator::ConstraintOperator(OperatorKind kind, std::string label, Boundary boundary,
                                       Grid grid, int components,
                                       Eigen::SparseMatrix<double> matrix)
    : kind_(kind),
      label_(std::move(label)),
      boundary_(boundary),
      grid_(std::move(grid)),
      components_(components),
      matrix_(std::move(matrix)) {
  matrix_.makeCompressed();
}

ConstraintOperator ConstraintOperator::build(OperatorKind kind, const Grid& grid,
                                             Boundary boundary, int components) {
  const int cells = grid.cell_count();
  std::vector<Triplet> t;
  int rows = 0;
  int n = components;
  switch (kind) {
    case OperatorKind::gradient_1d: {
      if (grid.dim() != 1) throw DimensionMismatch("gradient_1d needs a one-dimensional grid");
      if (components < 1) throw DimensionMismatch("gradient_1d needs at least one component");
      rows = cells * n;
      for (int i = 0; i < cells; ++i) {
        for (int c = 0; c < n; ++c) {
          add_forward_difference(grid, boundary, n, i, 0, c, i * n + c, 1.0, t);
        }
      }
      break;
    }
    case OperatorKind::divergence_2d:
    case OperatorKind::curl_2d: {
      if (grid.dim() != 2) throw DimensionMismatch(to_string(kind) + " needs a 2D grid");
      if (components != 2) throw DimensionMismatch(to_string(kind) + " acts on 2-vector fields");
      rows = cells;
      for (int i = 0; i < cells; ++i) {
        if (kind == OperatorKind::divergence_2d) {
          add_forward_difference(grid, boundary, 2, i, 0, 0, i, 1.0, t);
          add_forward_difference(grid, boundary, 2, i, 1, 1, i, 1.0, t);
        } else {
          add_forward_difference(grid, boundary, 2, i, 0, 1, i, 1.0, t);
          add_forward_difference(grid, boundary, 2, i, 1, 0, i, -1.0, t);
        }
      }
      break;
    }
    case OperatorKind::symmetric_gradient_2d: {
      if (grid.dim() != 2) throw DimensionMismatch("symmetric_gradient_2d needs a 2D grid");
      if (components != 2) {
        throw DimensionMismatch("symmetric_gradient_2d acts on 2-vector fields");
      }
      rows = cells * 3;
      for (int i = 0; i < cells; ++i) {
        add_forward_difference(grid, boundary, 2, i, 0, 0, 3 * i, 1.0, t);
        add_forward_difference(grid, boundary, 2, i, 1, 1, 3 * i + 1, 1.0, t);
        add_forward_difference(grid, boundary, 2, i, 1, 0, 3 * i + 2, 0.5, t);
        add_forward_difference(grid, boundary, 2, i, 0, 1, 3 * i + 2, 0.5, t);
      }
      break;
    }
    case OperatorKind::custom:
      throw DomainError("custom operators are built from triplets");
  }
  Eigen::SparseMatrix<double> m(rows, cells * n);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  return ConstraintOperator(kind, to_string(kind), boundary, grid, n, std::move(m));
}

ConstraintOperator ConstraintOperator::custom(const Grid& grid, int components, int rows,
                                              const std::vector<Triplet>& triplets,
                                              std::string label) {
  if (components < 1 || rows < 1) throw DimensionMismatch("custom operator has an empty side");
  const int cols = grid.cell_count() * components;
  for (const auto& tr : triplets) {
    if (tr.row() < 0 || tr.row() >= rows || tr.col() < 0 || tr.col() >= cols) {
      throw DimensionMismatch("triplet (" + std::to_string(tr.row()) + ", " +
                              std::to_string(tr.col()) + ") outside a " +
                              std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    }
    if (!std::isfinite(tr.value())) throw NonFiniteEval("custom operator entry is not finite");
  }
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return ConstraintOperator(OperatorKind::custom, std::move(label), Boundary::periodic, grid,
                            components, std::move(m));
}

ConstraintOperator ConstraintOperator::mass(const Grid& grid, int components) {
  std::vector<Triplet> t;
  for (int i = 0; i < grid.cell_count(); ++i) {
    for (int c = 0; c < components; ++c) t.emplace_back(c, i * components + c, 1.0);
  }
  return custom(grid, components, components, t, "mass");
}

Vector ConstraintOperator::apply(const Vector& u) const {
  if (u.size() != matrix_.cols()) {
    throw DimensionMismatch("operator expects " + std::to_string(matrix_.cols()) +
                            " values, got " + std::to_string(u.size()));
  }
  return matrix_ * u;
}

Vector ConstraintOperator::adjoint(const Vector& w) const {
  if (w.size() != matrix_.rows()) {
    throw DimensionMismatch("adjoint expects " + std::to_string(matrix_.rows()) +
                            " values, got " + std::to_string(w.size()));
  }
  return matrix_.transpose() * w;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd kernel_basis(const ConstraintOperator& op) {
  const Eigen::MatrixXd a = op.dense();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  const double cutoff = 1e-10 * smax;
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > cutoff && s[k] > 0.0) ++rank;
  }
  return svd.matrixV().rightCols(a.cols() - rank);
}

ImageProjection project_image(const ConstraintOperator& op, const Vector& tau) {
  if (tau.size() != op.rows()) throw DimensionMismatch("tau does not match the operator range");
  const Eigen::MatrixXd a = op.dense();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > 1e-10 * smax && s[k] > 0.0) ++rank;
  }
  const auto u = svd.matrixU().leftCols(rank);
  ImageProjection out;
  out.projection = u * (u.transpose() * tau);
  out.residual = (tau - out.projection).norm();
  return out;
}

MeasureResidual apply_to_measure(const ConstraintOperator& op, const DiscreteMeasure& mu,
                                 double tol) {
  if (!(mu.grid() == op.grid()) || mu.components() != op.components()) {
    throw DimensionMismatch("measure does not live on the operator's domain");
  }
  MeasureResidual r;
  double scale = 0.0;
  auto test = [&](const Vector& phi) {
    const Vector psi = op.adjoint(phi);
    scale = std::max(scale, psi.lpNorm<Eigen::Infinity>());
    r.residual = std::max(r.residual, std::abs(weak_star_pair(mu, psi)));
  };
  Vector phi = Vector::Zero(op.rows());
  for (int k = 0; k < op.rows(); ++k) {
    phi[k] = 1.0;
    test(phi);
    phi[k] = 0.0;
  }
  test(Vector::Ones(op.rows()));
  r.tolerance = tol * std::max(scale, 1.0) * std::max(1.0, total_variation(mu));
  r.in_kernel = r.residual < r.tolerance;
  return r;
}

}  // namespace mdual
