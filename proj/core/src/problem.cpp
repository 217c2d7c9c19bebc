#include "mdual/problem.hpp"

#include "mdual/errors.hpp"

namespace mdual {

Problem::Problem(ConvexIntegrand f, ConstraintOperator op, SourceTerm source, std::string id)
    : f_(std::move(f)), op_(std::move(op)), source_(std::move(source)), id_(std::move(id)) {
  if (f_.dimension() != op_.components()) {
    throw DimensionMismatch("integrand acts on R^" + std::to_string(f_.dimension()) +
                            " but the operator expects " + std::to_string(op_.components()) +
                            " components");
  }
  if (source_.u0.size() != op_.cols()) {
    throw DimensionMismatch("u0 has " + std::to_string(source_.u0.size()) +
                            " entries, expected " + std::to_string(op_.cols()));
  }
  if (source_.tau.size() != op_.rows()) {
    throw DimensionMismatch("tau has " + std::to_string(source_.tau.size()) +
                            " entries, expected " + std::to_string(op_.rows()));
  }
  const double scale = std::max(1.0, source_.tau.norm());
  const double mismatch = (op_.apply(source_.u0) - source_.tau).norm();
  if (mismatch > 1e-10 * scale) {
    throw DomainError("tau differs from A u0 by " + std::to_string(mismatch));
  }
  const auto proj = project_image(op_, source_.tau);
  if (proj.residual > 1e-10 * scale) {
    throw DomainError("tau is not in the image of A (residual " +
                      std::to_string(proj.residual) + ")");
  }
  kernel_ = std::make_shared<const Eigen::MatrixXd>(kernel_basis(op_));
  auto centers = std::make_shared<std::vector<Vector>>();
  for (int c = 0; c < grid().cell_count(); ++c) centers->push_back(grid().center(c));
  centers_ = std::move(centers);
}

Problem Problem::with_integrand(ConvexIntegrand f) const {
  if (f.dimension() != f_.dimension()) {
    throw DimensionMismatch("replacement integrand has a different dimension");
  }
  Problem p = *this;
  p.f_ = std::move(f);
  return p;
}

Vector Problem::point(const Vector& coords) const {
  if (coords.size() != kernel_->cols()) {
    throw DimensionMismatch("expected " + std::to_string(kernel_->cols()) +
                            " kernel coordinates");
  }
  if (coords.size() == 0) return source_.u0;
  return source_.u0 + (*kernel_) * coords;
}

DiscreteMeasure Problem::as_measure(const Vector& u) const {
  return DiscreteMeasure(grid(), components(), u);
}

}  // namespace mdual
