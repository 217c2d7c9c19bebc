#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdual/extended_real.hpp"

namespace mdual {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

enum class IntegrandKind { builtin, tabulated, mollified, custom };

/// Scalar field sampled at the cell centers of a uniform box grid, evaluated
/// by multilinear interpolation (clamped outside the outermost centers).
/// Used for the x-dependence of weighted integrands.
class SampledField {
 public:
  SampledField() = default;
  SampledField(std::vector<int> extents, std::vector<double> lengths,
               std::vector<double> values);

  double operator()(VectorRef x) const;
  double min() const;
  double max() const;
  /// Lipschitz constant of the interpolant.
  double lipschitz() const;
  const std::vector<double>& values() const { return values_; }
  const std::vector<int>& extents() const { return extents_; }
  const std::vector<double>& lengths() const { return lengths_; }

 private:
  std::vector<int> extents_;
  std::vector<double> lengths_;
  std::vector<double> values_;
};

struct ConjugateOptions {
  int coarse_points = 65;             // per axis when N <= 2
  int coarse_points_high_dim = 17;    // per axis when N >= 3
  int refine_steps = 60;
  double infinity_margin = 1e-9;      // f* = +inf once |z*| > M + margin
  double blowup_threshold = 1e12;
  double max_radius = 1e8;
};

struct ConjugateResult {
  ExtendedReal value;
  /// A maximizer of z*.z - f(x, z); empty when the value is +inf. For
  /// suprema that are only approached asymptotically this is the last
  /// search point.
  Vector argmax;
};

struct RecessionOptions {
  int k_min = 4;
  int k_max = 40;
  double tol = 1e-7;  // relative, on successive difference quotients
};

namespace detail {

class IntegrandModel {
 public:
  virtual ~IntegrandModel() = default;

  virtual double eval(VectorRef x, VectorRef z) const = 0;
  virtual IntegrandKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual double growth_constant() const = 0;
  virtual double modulus(double r) const = 0;
  virtual int dimension() const = 0;
  virtual bool differentiable() const { return false; }

  /// Gradient where it exists. Models with known kinks throw
  /// NotDifferentiable there; the 1-homogeneous builtins return the
  /// minimal-norm subgradient at the origin.
  virtual Vector gradient(VectorRef x, VectorRef z) const;
  /// Some element of the subdifferential; never throws NotDifferentiable.
  virtual Vector subgradient_element(VectorRef x, VectorRef z) const;
  virtual std::optional<ConjugateResult> closed_form_conjugate(
      VectorRef /*x*/, VectorRef /*zstar*/) const {
    return std::nullopt;
  }
  /// Value-only variant of `closed_form_conjugate`; must not allocate.
  virtual std::optional<ExtendedReal> closed_form_conjugate_value(
      VectorRef /*x*/, VectorRef /*zstar*/) const {
    return std::nullopt;
  }
};

}  // namespace detail

/// A convex integrand f(x, z) >= 0 with linear growth
/// (|z| - 1)/M <= f(x, z) <= M (1 + |z|). Immutable; copies share state.
class ConvexIntegrand {
 public:
  using Function = std::function<double(VectorRef x, VectorRef z)>;
  using Modulus = std::function<double(double r)>;

  /// |z|
  static ConvexIntegrand abs(int dimension = 1);
  /// sqrt(1 + |z|^2)
  static ConvexIntegrand area(int dimension = 1);
  /// |z|^2 / (2 gamma) for |z| <= gamma, |z| - gamma / 2 beyond.
  static ConvexIntegrand huber(double gamma, int dimension = 1);
  /// a(x) |z| with a > 0 sampled on a grid.
  static ConvexIntegrand weighted_abs(SampledField weight, int dimension = 1);
  /// Scalar integrand tabulated as (x, z, f) triples; piecewise linear in
  /// z with linear extrapolation, linear in x between tabulated columns.
  static ConvexIntegrand tabulated(const std::vector<std::array<double, 3>>& points,
                                   std::optional<double> growth_constant = std::nullopt);
  /// Wraps an arbitrary callable. Convexity and growth are the caller's
  /// claim; `verify_growth` checks them by sampling.
  static ConvexIntegrand from_function(std::string name, int dimension,
                                       double growth_constant, Function f,
                                       Modulus modulus = {});

  explicit ConvexIntegrand(std::shared_ptr<const detail::IntegrandModel> model);

  /// f(x, z); throws NonFiniteEval on NaN or infinite values.
  double operator()(VectorRef x, VectorRef z) const;

  IntegrandKind kind() const { return model_->kind(); }
  std::string name() const { return model_->name(); }
  double growth_constant() const { return model_->growth_constant(); }
  double modulus(double r) const { return model_->modulus(r); }
  int dimension() const { return model_->dimension(); }
  bool differentiable() const { return model_->differentiable(); }

  const detail::IntegrandModel& model() const { return *model_; }

 private:
  std::shared_ptr<const detail::IntegrandModel> model_;
};

/// f*(x, z*) = sup_z { z*.z - f(x, z) }. Uses the closed form when the
/// integrand provides one, otherwise `conjugate_search`.
ExtendedReal conjugate(const ConvexIntegrand& f, VectorRef x, VectorRef zstar,
                       const ConjugateOptions& options = {});
ConjugateResult conjugate_with_argmax(const ConvexIntegrand& f, VectorRef x,
                                      VectorRef zstar,
                                      const ConjugateOptions& options = {});
/// Two-stage numerical search: coarse grid on a ball that provably contains
/// the maximizer (expanded while the best point sits on the boundary), then
/// golden-section / coordinate refinement.
ConjugateResult conjugate_search(const ConvexIntegrand& f, VectorRef x,
                                 VectorRef zstar,
                                 const ConjugateOptions& options = {});

/// f^inf(x, z) = lim_{t -> inf} (f(x, t z) - f(x, 0)) / t along t = 2^k.
double recession(const ConvexIntegrand& f, VectorRef x, VectorRef z,
                 const RecessionOptions& options = {});

/// grad_z f(x, z).
Vector subgradient(const ConvexIntegrand& f, VectorRef x, VectorRef z);

/// Some element of the z-subdifferential, for solvers that tolerate kinks.
Vector subgradient_element(const ConvexIntegrand& f, VectorRef x, VectorRef z);

/// f^delta = f(x, .) * rho_delta with the tensorized (1 - s^2)^3 bump on
/// [-delta, delta]^N and `nodes` Gauss-Legendre nodes per axis.
ConvexIntegrand mollify(const ConvexIntegrand& f, double delta, int nodes = 33);

/// (Sf)(x, z) = (1 - |z|) f(x, z / (1 - |z|)) for |z| < 1.
double e_class_transform(const ConvexIntegrand& f, VectorRef x, VectorRef z);
/// Continuous extension of Sf to the closed ball; equals f^inf on |z| = 1.
double e_class_extension(const ConvexIntegrand& f, VectorRef x, VectorRef z);

struct GrowthSampleSpec {
  int z_samples = 200;
  double radius = 10.0;
  /// Points of the domain at which to sample; defaults to the origin.
  std::vector<Vector> x_samples;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
};

struct GrowthViolation {
  std::string check;  // growth_lower, growth_upper, convexity, lipschitz, modulus
  double amount = 0.0;
  Vector x;
  Vector z;
};

/// Worst violation per failed check; no entries means every check passed.
struct GrowthReport {
  std::vector<GrowthViolation> violations;
  int samples_checked = 0;
  bool pass() const { return violations.empty(); }
};

GrowthReport verify_growth(const ConvexIntegrand& f, const GrowthSampleSpec& spec = {});

}  // namespace mdual
