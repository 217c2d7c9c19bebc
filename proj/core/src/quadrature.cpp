#include "mdual/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "mdual/errors.hpp"

namespace mdual {

QuadratureRule gauss_legendre(int count) {
  if (count < 1) throw DomainError("quadrature needs at least one node");
  QuadratureRule rule;
  rule.nodes.assign(count, 0.0);
  rule.weights.assign(count, 0.0);
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[count - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[count - 1 - i] = w;
  }
  if (count % 2 == 1) rule.nodes[count / 2] = 0.0;
  return rule;
}

double bump_profile(double s) {
  const double t = 1.0 - s * s;
  return t > 0.0 ? t * t * t : 0.0;
}

QuadratureRule bump_mollifier_rule(int count) {
  QuadratureRule rule = gauss_legendre(count);
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    rule.weights[i] *= bump_profile(rule.nodes[i]);
    total += rule.weights[i];
  }
  for (auto& w : rule.weights) w /= total;
  // Enforce exact mirror symmetry so affine integrands are reproduced.
  for (int i = 0; i < count / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[count - 1 - i]);
    rule.weights[i] = rule.weights[count - 1 - i] = w;
  }
  return rule;
}

}  // namespace mdual
