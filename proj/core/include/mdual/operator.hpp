#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

#include "mdual/grid.hpp"
#include "mdual/measure.hpp"

namespace mdual {

enum class OperatorKind { gradient_1d, divergence_2d, curl_2d, symmetric_gradient_2d, custom };
enum class Boundary { periodic, zero };

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& name);
std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

/// Linear map A from R^N-valued grid functions to R^m. Both spaces carry the
/// inner product weighted by the cell volume, so the adjoint is exactly the
/// transpose.
///
/// Stencils use forward differences (u(i + e_k) - u(i)) / h_k. With the
/// zero boundary, values outside the grid are 0.
///   gradient_1d            N -> N per cell, componentwise
///   divergence_2d          2 -> 1 per cell, D1 u1 + D2 u2
///   curl_2d                2 -> 1 per cell, D1 u2 - D2 u1
///   symmetric_gradient_2d  2 -> 3 per cell, (D1 u1, D2 u2, (D2 u1 + D1 u2) / 2)
class ConstraintOperator {
 public:
  using Triplet = Eigen::Triplet<double>;

  static ConstraintOperator build(OperatorKind kind, const Grid& grid,
                                  Boundary boundary = Boundary::periodic, int components = 1);
  /// Arbitrary matrix with `rows` rows acting on grid functions with
  /// `components` values per cell.
  static ConstraintOperator custom(const Grid& grid, int components, int rows,
                                   const std::vector<Triplet>& triplets,
                                   std::string label = "custom");
  /// u -> (sum_i u_i^c)_c: one row per component summing over all cells.
  static ConstraintOperator mass(const Grid& grid, int components = 1);

  OperatorKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  Boundary boundary() const { return boundary_; }
  const Grid& grid() const { return grid_; }
  /// N, values per cell of the domain space.
  int components() const { return components_; }
  int cols() const { return static_cast<int>(matrix_.cols()); }
  int rows() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }

  Vector apply(const Vector& u) const;
  Vector adjoint(const Vector& w) const;

 private:
  ConstraintOperator(OperatorKind kind, std::string label, Boundary boundary, Grid grid,
                     int components, Eigen::SparseMatrix<double> matrix);

  OperatorKind kind_ = OperatorKind::custom;
  std::string label_;
  Boundary boundary_ = Boundary::periodic;
  Grid grid_;
  int components_ = 1;
  Eigen::SparseMatrix<double> matrix_;
};

/// Euclidean-orthonormal basis of ker A (one column per vector) from a dense
/// SVD with cutoff 1e-10 * sigma_max. Zero columns when the kernel is trivial.
Eigen::MatrixXd kernel_basis(const ConstraintOperator& op);

struct ImageProjection {
  Vector projection;
  double residual = 0.0;  // Euclidean norm of tau - projection
};

/// Least-squares projection onto the column space of A.
ImageProjection project_image(const ConstraintOperator& op, const Vector& tau);

struct MeasureResidual {
  double residual = 0.0;
  double tolerance = 0.0;
  bool in_kernel = false;
};

/// Distributional test of A mu = 0: max over the panel {e_r} u {1} of the
/// target space of |<mu, A^T phi>|. The measure is in the kernel when the
/// residual is below tol * max ||A^T phi||_inf * max(1, |mu|(Omega)).
MeasureResidual apply_to_measure(const ConstraintOperator& op, const DiscreteMeasure& mu,
                                 double tol = 1e-8);

}  // namespace mdual
