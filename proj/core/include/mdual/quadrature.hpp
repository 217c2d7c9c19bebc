#pragma once

#include <vector>

namespace mdual {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `count` nodes on [-1, 1]; nodes ascending and
/// exactly symmetric about 0.
QuadratureRule gauss_legendre(int count);

/// Gauss-Legendre nodes on [-1, 1] with weights multiplied by the even bump
/// (1 - s^2)^3 and renormalized to sum to one.
QuadratureRule bump_mollifier_rule(int count);

/// Unnormalized mollifier profile (1 - s^2)^3 for |s| < 1, zero otherwise.
double bump_profile(double s);

}  // namespace mdual
