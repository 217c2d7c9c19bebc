#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mdual/integrand.hpp"
#include "mdual/measure.hpp"
#include "mdual/operator.hpp"

namespace mdual {

/// Right-hand side tau = A u0 together with the reference point u0.
struct SourceTerm {
  Vector tau;
  Vector u0;
};

/// Minimize sum_cells f(x, u) dx over u in u0 + ker A, and its relaxation
/// and dual. Holds the kernel basis of A, computed once on construction.
class Problem {
 public:
  /// Throws DimensionMismatch on size disagreements and DomainError when
  /// tau is not A u0 or not in the image of A (tolerance 1e-10, relative
  /// to max(1, |tau|)).
  Problem(ConvexIntegrand f, ConstraintOperator op, SourceTerm source, std::string id = {});

  /// Same grid, operator and source with another integrand.
  Problem with_integrand(ConvexIntegrand f) const;

  const std::string& id() const { return id_; }
  const Grid& grid() const { return op_.grid(); }
  const ConvexIntegrand& f() const { return f_; }
  const ConstraintOperator& op() const { return op_; }
  const SourceTerm& source() const { return source_; }
  const Vector& tau() const { return source_.tau; }
  const Vector& u0() const { return source_.u0; }
  /// Orthonormal columns spanning ker A.
  const Eigen::MatrixXd& kernel() const { return *kernel_; }

  int cells() const { return grid().cell_count(); }
  int components() const { return op_.components(); }
  double dx() const { return grid().cell_volume(); }
  double volume() const { return grid().domain_volume(); }
  const Vector& center(int cell) const { return (*centers_)[cell]; }

  /// u0 + K c.
  Vector point(const Vector& coords) const;
  DiscreteMeasure as_measure(const Vector& u) const;

 private:
  ConvexIntegrand f_;
  ConstraintOperator op_;
  SourceTerm source_;
  std::string id_;
  std::shared_ptr<const Eigen::MatrixXd> kernel_;
  std::shared_ptr<const std::vector<Vector>> centers_;
};

}  // namespace mdual
