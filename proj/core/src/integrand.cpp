#include "mdual/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "mdual/errors.hpp"
#include "mdual/quadrature.hpp"

namespace mdual {
namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require_dimension(VectorRef z, int n, const char* what) {
  if (z.size() != n) {
    throw DimensionMismatch(std::string(what) + ": expected a vector of size " +
                            std::to_string(n) + ", got " + std::to_string(z.size()));
  }
}

Vector central_difference(const detail::IntegrandModel& m, VectorRef x, VectorRef z,
                          double h, Vector* left, Vector* right) {
  const int n = static_cast<int>(z.size());
  Vector grad(n);
  Vector zp = z;
  const double f0 = m.eval(x, z);
  if (left) left->resize(n);
  if (right) right->resize(n);
  for (int k = 0; k < n; ++k) {
    zp[k] = z[k] + h;
    const double fp = m.eval(x, zp);
    zp[k] = z[k] - h;
    const double fm = m.eval(x, zp);
    zp[k] = z[k];
    grad[k] = (fp - fm) / (2.0 * h);
    if (left) (*left)[k] = (f0 - fm) / h;
    if (right) (*right)[k] = (fp - f0) / h;
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Builtins

class AbsModel : public detail::IntegrandModel {
 public:
  explicit AbsModel(int n) : n_(n) {}
  double eval(VectorRef, VectorRef z) const override { return z.norm(); }
  IntegrandKind kind() const override { return IntegrandKind::builtin; }
  std::string name() const override { return "abs"; }
  double growth_constant() const override { return 1.0; }
  double modulus(double) const override { return 0.0; }
  int dimension() const override { return n_; }
  Vector gradient(VectorRef x, VectorRef z) const override {
    return subgradient_element(x, z);
  }
  Vector subgradient_element(VectorRef, VectorRef z) const override {
    const double r = z.norm();
    if (r == 0.0) return Vector::Zero(n_);
    return z / r;
  }
  std::optional<ConjugateResult> closed_form_conjugate(VectorRef, VectorRef p) const override {
    if (p.norm() > 1.0 + 1e-9) return ConjugateResult{ExtendedReal::plus_infinity(), {}};
    return ConjugateResult{0.0, Vector::Zero(n_)};
  }
  std::optional<ExtendedReal> closed_form_conjugate_value(VectorRef, VectorRef p) const override {
    if (p.norm() > 1.0 + 1e-9) return ExtendedReal::plus_infinity();
    return ExtendedReal(0.0);
  }

 private:
  int n_;
};

class AreaModel : public detail::IntegrandModel {
 public:
  explicit AreaModel(int n) : n_(n) {}
  double eval(VectorRef, VectorRef z) const override {
    return std::sqrt(1.0 + z.squaredNorm());
  }
  IntegrandKind kind() const override { return IntegrandKind::builtin; }
  std::string name() const override { return "area"; }
  double growth_constant() const override { return 1.0; }
  double modulus(double) const override { return 0.0; }
  int dimension() const override { return n_; }
  bool differentiable() const override { return true; }
  Vector gradient(VectorRef, VectorRef z) const override {
    return z / std::sqrt(1.0 + z.squaredNorm());
  }
  Vector subgradient_element(VectorRef x, VectorRef z) const override {
    return gradient(x, z);
  }
  std::optional<ConjugateResult> closed_form_conjugate(VectorRef, VectorRef p) const override {
    const double r2 = p.squaredNorm();
    if (std::sqrt(r2) > 1.0 + 1e-9) return ConjugateResult{ExtendedReal::plus_infinity(), {}};
    const double s = std::sqrt(std::max(0.0, 1.0 - r2));
    return ConjugateResult{-s, p / std::max(s, 1e-8)};
  }
  std::optional<ExtendedReal> closed_form_conjugate_value(VectorRef, VectorRef p) const override {
    const double r2 = p.squaredNorm();
    if (std::sqrt(r2) > 1.0 + 1e-9) return ExtendedReal::plus_infinity();
    return ExtendedReal(-std::sqrt(std::max(0.0, 1.0 - r2)));
  }

 private:
  int n_;
};

class HuberModel : public detail::IntegrandModel {
 public:
  HuberModel(double gamma, int n) : gamma_(gamma), n_(n) {
    if (!(gamma > 0.0)) throw DomainError("huber parameter must be positive");
  }
  double eval(VectorRef, VectorRef z) const override {
    const double r = z.norm();
    return r <= gamma_ ? r * r / (2.0 * gamma_) : r - 0.5 * gamma_;
  }
  IntegrandKind kind() const override { return IntegrandKind::builtin; }
  std::string name() const override { return "huber(" + format_number(gamma_) + ")"; }
  double growth_constant() const override { return std::max(1.0, 0.5 * gamma_); }
  double modulus(double) const override { return 0.0; }
  int dimension() const override { return n_; }
  bool differentiable() const override { return true; }
  Vector gradient(VectorRef, VectorRef z) const override {
    const double r = z.norm();
    if (r <= gamma_) return z / gamma_;
    return z / r;
  }
  Vector subgradient_element(VectorRef x, VectorRef z) const override {
    return gradient(x, z);
  }
  std::optional<ConjugateResult> closed_form_conjugate(VectorRef, VectorRef p) const override {
    const double r = p.norm();
    if (r > 1.0 + 1e-9) return ConjugateResult{ExtendedReal::plus_infinity(), {}};
    const double rc = std::min(r, 1.0);
    return ConjugateResult{0.5 * gamma_ * rc * rc, gamma_ * p};
  }
  std::optional<ExtendedReal> closed_form_conjugate_value(VectorRef, VectorRef p) const override {
    const double r = p.norm();
    if (r > 1.0 + 1e-9) return ExtendedReal::plus_infinity();
    const double rc = std::min(r, 1.0);
    return ExtendedReal(0.5 * gamma_ * rc * rc);
  }

 private:
  double gamma_;
  int n_;
};

class WeightedAbsModel : public detail::IntegrandModel {
 public:
  WeightedAbsModel(SampledField a, int n) : a_(std::move(a)), n_(n) {
    if (a_.values().empty()) throw DomainError("weighted_abs needs weight samples");
    if (!(a_.min() > 0.0)) throw DomainError("weighted_abs weights must be positive");
  }
  double eval(VectorRef x, VectorRef z) const override { return a_(x) * z.norm(); }
  IntegrandKind kind() const override { return IntegrandKind::builtin; }
  std::string name() const override { return "weighted_abs"; }
  double growth_constant() const override {
    return std::max({1.0, a_.max(), 1.0 / a_.min()});
  }
  double modulus(double r) const override { return a_.lipschitz() * r; }
  int dimension() const override { return n_; }
  Vector gradient(VectorRef x, VectorRef z) const override {
    return subgradient_element(x, z);
  }
  Vector subgradient_element(VectorRef x, VectorRef z) const override {
    const double r = z.norm();
    if (r == 0.0) return Vector::Zero(n_);
    return a_(x) * z / r;
  }
  std::optional<ConjugateResult> closed_form_conjugate(VectorRef x, VectorRef p) const override {
    if (p.norm() > a_(x) + 1e-9) return ConjugateResult{ExtendedReal::plus_infinity(), {}};
    return ConjugateResult{0.0, Vector::Zero(n_)};
  }
  std::optional<ExtendedReal> closed_form_conjugate_value(VectorRef x, VectorRef p) const override {
    if (p.norm() > a_(x) + 1e-9) return ExtendedReal::plus_infinity();
    return ExtendedReal(0.0);
  }
  const SampledField& weight() const { return a_; }

 private:
  SampledField a_;
  int n_;
};

// ---------------------------------------------------------------------------
// Tabulated scalar integrand

class TabulatedModel : public detail::IntegrandModel {
 public:
  struct Column {
    double x;
    std::vector<double> z;
    std::vector<double> f;
  };

  TabulatedModel(const std::vector<std::array<double, 3>>& points,
                 std::optional<double> m) {
    std::map<double, std::map<double, double>> by_x;
    for (const auto& p : points) {
      for (double v : p) {
        if (!std::isfinite(v)) throw NonFiniteEval("tabulated point is not finite");
      }
      by_x[p[0]][p[1]] = p[2];
    }
    for (auto& [x, col] : by_x) {
      if (col.size() < 2) throw DomainError("each tabulated x needs at least two z samples");
      Column c{x, {}, {}};
      for (auto& [z, f] : col) {
        c.z.push_back(z);
        c.f.push_back(f);
      }
      columns_.push_back(std::move(c));
    }
    if (columns_.empty()) throw DomainError("tabulated integrand has no points");
    m_ = m ? *m : estimate_growth();
  }

  double eval(VectorRef x, VectorRef z) const override {
    const double zz = z[0];
    if (columns_.size() == 1 || x.size() == 0) return column_eval(columns_.front(), zz);
    const double xx = x[0];
    if (xx <= columns_.front().x) return column_eval(columns_.front(), zz);
    if (xx >= columns_.back().x) return column_eval(columns_.back(), zz);
    auto it = std::upper_bound(columns_.begin(), columns_.end(), xx,
                               [](double v, const Column& c) { return v < c.x; });
    const Column& hi = *it;
    const Column& lo = *(it - 1);
    const double t = (xx - lo.x) / (hi.x - lo.x);
    return (1.0 - t) * column_eval(lo, zz) + t * column_eval(hi, zz);
  }
  IntegrandKind kind() const override { return IntegrandKind::tabulated; }
  std::string name() const override { return "tabulated"; }
  double growth_constant() const override { return m_; }
  double modulus(double r) const override { return x_lipschitz() * r; }
  int dimension() const override { return 1; }

  Vector gradient(VectorRef x, VectorRef z) const override {
    Vector left, right;
    const double h = 1e-7 * std::max(1.0, std::abs(z[0]));
    Vector g = central_difference(*this, x, z, h, &left, &right);
    if (std::abs(left[0] - right[0]) > 1e-6) {
      throw NotDifferentiable("tabulated integrand has a kink at z = " + format_number(z[0]));
    }
    return g;
  }
  Vector subgradient_element(VectorRef x, VectorRef z) const override {
    Vector right;
    const double h = 1e-7 * std::max(1.0, std::abs(z[0]));
    central_difference(*this, x, z, h, nullptr, &right);
    return right;
  }

 private:
  static double column_eval(const Column& c, double z) {
    const auto& zs = c.z;
    const auto& fs = c.f;
    const size_t n = zs.size();
    size_t i;
    if (z <= zs.front()) {
      i = 0;
    } else if (z >= zs.back()) {
      i = n - 2;
    } else {
      i = static_cast<size_t>(std::upper_bound(zs.begin(), zs.end(), z) - zs.begin()) - 1;
    }
    const double slope = (fs[i + 1] - fs[i]) / (zs[i + 1] - zs[i]);
    return fs[i] + slope * (z - zs[i]);
  }

  double estimate_growth() const {
    double m = 1.0;
    for (const auto& c : columns_) {
      const size_t n = c.z.size();
      double min_tail = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i + 1 < n; ++i) {
        const double slope = (c.f[i + 1] - c.f[i]) / (c.z[i + 1] - c.z[i]);
        m = std::max(m, std::abs(slope));
      }
      const double left = -(c.f[1] - c.f[0]) / (c.z[1] - c.z[0]);
      const double right = (c.f[n - 1] - c.f[n - 2]) / (c.z[n - 1] - c.z[n - 2]);
      min_tail = std::min(left, right);
      if (min_tail > 0.0) m = std::max(m, 1.0 / min_tail);
      m = std::max(m, column_eval(c, 0.0));
    }
    return m;
  }

  double x_lipschitz() const {
    double l = 0.0;
    for (size_t k = 0; k + 1 < columns_.size(); ++k) {
      const auto& a = columns_[k];
      const auto& b = columns_[k + 1];
      std::vector<double> zs = a.z;
      zs.insert(zs.end(), b.z.begin(), b.z.end());
      for (double z : zs) {
        const double diff = std::abs(column_eval(a, z) - column_eval(b, z)) / (1.0 + std::abs(z));
        l = std::max(l, diff / (b.x - a.x));
      }
    }
    return l;
  }

  std::vector<Column> columns_;
  double m_ = 1.0;
};

// ---------------------------------------------------------------------------

class FunctionModel : public detail::IntegrandModel {
 public:
  FunctionModel(std::string name, int n, double m, ConvexIntegrand::Function f,
                ConvexIntegrand::Modulus modulus)
      : name_(std::move(name)), n_(n), m_(m), f_(std::move(f)), modulus_(std::move(modulus)) {}
  double eval(VectorRef x, VectorRef z) const override { return f_(x, z); }
  IntegrandKind kind() const override { return IntegrandKind::custom; }
  std::string name() const override { return name_; }
  double growth_constant() const override { return m_; }
  double modulus(double r) const override { return modulus_ ? modulus_(r) : 0.0; }
  int dimension() const override { return n_; }
  Vector gradient(VectorRef x, VectorRef z) const override {
    Vector left, right;
    const double h = 1e-6 * std::max(1.0, z.norm());
    Vector g = central_difference(*this, x, z, h, &left, &right);
    if ((left - right).lpNorm<Eigen::Infinity>() > 1e-4) {
      throw NotDifferentiable(name_ + " is not differentiable at the probe point");
    }
    return g;
  }
  Vector subgradient_element(VectorRef x, VectorRef z) const override {
    Vector right;
    const double h = 1e-7 * std::max(1.0, z.norm());
    central_difference(*this, x, z, h, nullptr, &right);
    return right;
  }

 private:
  std::string name_;
  int n_;
  double m_;
  ConvexIntegrand::Function f_;
  ConvexIntegrand::Modulus modulus_;
};

// ---------------------------------------------------------------------------

class MollifiedModel : public detail::IntegrandModel {
 public:
  MollifiedModel(ConvexIntegrand base, double delta, int nodes)
      : base_(std::move(base)), delta_(delta), rule_(bump_mollifier_rule(nodes)) {
    if (!(delta > 0.0)) throw DomainError("mollification radius must be positive");
    const int n = base_.dimension();
    int total = 1;
    for (int k = 0; k < n; ++k) total *= nodes;
    offsets_.resize(n, total);
    weights_.resize(total);
    std::vector<int> idx(n, 0);
    for (int q = 0; q < total; ++q) {
      double w = 1.0;
      for (int k = 0; k < n; ++k) {
        offsets_(k, q) = delta * rule_.nodes[idx[k]];
        w *= rule_.weights[idx[k]];
      }
      weights_[q] = w;
      for (int k = 0; k < n; ++k) {
        if (++idx[k] < nodes) break;
        idx[k] = 0;
      }
    }
  }

  double eval(VectorRef x, VectorRef z) const override {
    Vector y(z.size());
    double acc = 0.0;
    for (Eigen::Index q = 0; q < weights_.size(); ++q) {
      y = z - offsets_.col(q);
      acc += weights_[q] * base_.model().eval(x, y);
    }
    return acc;
  }
  IntegrandKind kind() const override { return IntegrandKind::mollified; }
  std::string name() const override {
    return "mollified(" + base_.name() + "," + format_number(delta_) + ")";
  }
  double growth_constant() const override { return base_.growth_constant() * (1.0 + delta_); }
  double modulus(double r) const override { return base_.modulus(r); }
  int dimension() const override { return base_.dimension(); }
  bool differentiable() const override { return true; }
  Vector gradient(VectorRef x, VectorRef z) const override { return subgradient_element(x, z); }
  Vector subgradient_element(VectorRef x, VectorRef z) const override {
    Vector y(z.size());
    Vector g = Vector::Zero(z.size());
    for (Eigen::Index q = 0; q < weights_.size(); ++q) {
      y = z - offsets_.col(q);
      g += weights_[q] * base_.model().subgradient_element(x, y);
    }
    return g;
  }

  const ConvexIntegrand& base() const { return base_; }
  double delta() const { return delta_; }

 private:
  ConvexIntegrand base_;
  double delta_;
  QuadratureRule rule_;
  Eigen::MatrixXd offsets_;
  Eigen::VectorXd weights_;
};

// ---------------------------------------------------------------------------
// Conjugate search

double golden_max(const std::function<double(double)>& g, double a, double b, int steps,
                  double* arg) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int i = 0; i < steps; ++i) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  if (gc >= gd) {
    *arg = c;
    return gc;
  }
  *arg = d;
  return gd;
}

}  // namespace

// ---------------------------------------------------------------------------

SampledField::SampledField(std::vector<int> extents, std::vector<double> lengths,
                           std::vector<double> values)
    : extents_(std::move(extents)), lengths_(std::move(lengths)), values_(std::move(values)) {
  if (extents_.empty() || extents_.size() != lengths_.size()) {
    throw DimensionMismatch("sampled field extents and lengths disagree");
  }
  size_t total = 1;
  for (int e : extents_) {
    if (e < 1) throw DomainError("sampled field extent must be positive");
    total *= static_cast<size_t>(e);
  }
  if (values_.size() != total) {
    throw DimensionMismatch("sampled field expects " + std::to_string(total) + " values, got " +
                            std::to_string(values_.size()));
  }
}

double SampledField::operator()(VectorRef x) const {
  const int d = static_cast<int>(extents_.size());
  if (x.size() < d) throw DimensionMismatch("sampled field evaluated at a point of wrong dimension");
  // Multilinear interpolation over the lattice of cell centers.
  std::vector<int> lo(d);
  std::vector<double> t(d);
  for (int k = 0; k < d; ++k) {
    const double h = lengths_[k] / extents_[k];
    double s = x[k] / h - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(extents_[k] - 1));
    int i = std::min(static_cast<int>(std::floor(s)), std::max(0, extents_[k] - 2));
    lo[k] = i;
    t[k] = extents_[k] == 1 ? 0.0 : s - i;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    size_t flat = 0;
    size_t stride = 1;
    for (int k = 0; k < d; ++k) {
      const int bit = (corner >> k) & 1;
      int i = lo[k] + bit;
      if (i >= extents_[k]) i = extents_[k] - 1;
      w *= bit ? t[k] : 1.0 - t[k];
      flat += static_cast<size_t>(i) * stride;
      stride *= static_cast<size_t>(extents_[k]);
    }
    if (w != 0.0) acc += w * values_[flat];
  }
  return acc;
}

double SampledField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double SampledField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double SampledField::lipschitz() const {
  const int d = static_cast<int>(extents_.size());
  double l = 0.0;
  size_t stride = 1;
  for (int k = 0; k < d; ++k) {
    const double h = lengths_[k] / extents_[k];
    for (size_t i = 0; i < values_.size(); ++i) {
      const size_t coord = (i / stride) % static_cast<size_t>(extents_[k]);
      if (coord + 1 < static_cast<size_t>(extents_[k])) {
        l = std::max(l, std::abs(values_[i + stride] - values_[i]) / h);
      }
    }
    stride *= static_cast<size_t>(extents_[k]);
  }
  // Multilinear interpolation is Lipschitz with at most sqrt(d) times the
  // largest axis slope.
  return l * std::sqrt(static_cast<double>(d));
}

// ---------------------------------------------------------------------------

Vector detail::IntegrandModel::gradient(VectorRef x, VectorRef z) const {
  return central_difference(*this, x, z, 1e-6 * std::max(1.0, z.norm()), nullptr, nullptr);
}

Vector detail::IntegrandModel::subgradient_element(VectorRef x, VectorRef z) const {
  return gradient(x, z);
}

ConvexIntegrand::ConvexIntegrand(std::shared_ptr<const detail::IntegrandModel> model)
    : model_(std::move(model)) {
  if (!model_) throw DomainError("integrand model is null");
  if (model_->dimension() < 1) throw DomainError("integrand dimension must be positive");
  if (!(model_->growth_constant() > 0.0)) throw DomainError("growth constant must be positive");
}

ConvexIntegrand ConvexIntegrand::abs(int dimension) {
  return ConvexIntegrand(std::make_shared<AbsModel>(dimension));
}
ConvexIntegrand ConvexIntegrand::area(int dimension) {
  return ConvexIntegrand(std::make_shared<AreaModel>(dimension));
}
ConvexIntegrand ConvexIntegrand::huber(double gamma, int dimension) {
  return ConvexIntegrand(std::make_shared<HuberModel>(gamma, dimension));
}
ConvexIntegrand ConvexIntegrand::weighted_abs(SampledField weight, int dimension) {
  return ConvexIntegrand(std::make_shared<WeightedAbsModel>(std::move(weight), dimension));
}
ConvexIntegrand ConvexIntegrand::tabulated(const std::vector<std::array<double, 3>>& points,
                                           std::optional<double> growth_constant) {
  return ConvexIntegrand(std::make_shared<TabulatedModel>(points, growth_constant));
}
ConvexIntegrand ConvexIntegrand::from_function(std::string name, int dimension,
                                               double growth_constant, Function f,
                                               Modulus modulus) {
  return ConvexIntegrand(std::make_shared<FunctionModel>(std::move(name), dimension,
                                                         growth_constant, std::move(f),
                                                         std::move(modulus)));
}

double ConvexIntegrand::operator()(VectorRef x, VectorRef z) const {
  require_dimension(z, dimension(), "integrand argument");
  const double v = model_->eval(x, z);
  if (!std::isfinite(v)) throw NonFiniteEval(name() + " returned a non-finite value");
  return v;
}

// ---------------------------------------------------------------------------

ConjugateResult conjugate_search(const ConvexIntegrand& f, VectorRef x, VectorRef zstar,
                                 const ConjugateOptions& options) {
  const int n = f.dimension();
  require_dimension(zstar, n, "conjugate argument");
  const double m = f.growth_constant();
  const double pnorm = zstar.norm();
  if (pnorm > m + options.infinity_margin) {
    return {ExtendedReal::plus_infinity(), {}};
  }
  auto objective = [&](VectorRef z) {
    const double v = zstar.dot(z) - f(x, z);
    if (!std::isfinite(v)) throw NonFiniteEval("conjugate objective is not finite");
    return v;
  };

  const int per_axis = n <= 2 ? options.coarse_points : options.coarse_points_high_dim;
  double radius = m * (2.0 + pnorm * m);
  Vector best(n);
  double best_value = -std::numeric_limits<double>::infinity();
  double spacing = 0.0;
  while (true) {
    spacing = 2.0 * radius / (per_axis - 1);
    std::vector<int> idx(n, 0);
    Vector z(n);
    best_value = -std::numeric_limits<double>::infinity();
    double best_interior = -std::numeric_limits<double>::infinity();
    while (true) {
      for (int k = 0; k < n; ++k) z[k] = -radius + spacing * idx[k];
      const double v = objective(z);
      bool boundary = false;
      for (int k = 0; k < n; ++k) {
        if (idx[k] == 0 || idx[k] == per_axis - 1) boundary = true;
      }
      if (v > best_value) {
        best_value = v;
        best = z;
      }
      if (!boundary) best_interior = std::max(best_interior, v);
      int k = 0;
      for (; k < n; ++k) {
        if (++idx[k] < per_axis) break;
        idx[k] = 0;
      }
      if (k == n) break;
    }
    // Ties along a flat ray (e.g. |z*| = M for 1-homogeneous f) are not
    // growth; only a margin over the interior counts.
    const bool on_boundary =
        best_value > best_interior + 1e-9 * (1.0 + std::abs(best_interior));
    if (best_value > options.blowup_threshold) return {ExtendedReal::plus_infinity(), {}};
    if (!on_boundary) break;
    // A maximizer still on the boundary of the largest ball means the
    // objective keeps increasing: the supremum is not attained.
    if (radius >= options.max_radius) return {ExtendedReal::plus_infinity(), {}};
    radius *= 4.0;
  }

  // Local refinement: golden section per coordinate on a shrinking bracket.
  Vector z = best;
  double half = spacing;
  const int sweeps = n == 1 ? 1 : std::max(1, options.refine_steps / 10);
  const int steps = n == 1 ? options.refine_steps : 10;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int k = 0; k < n; ++k) {
      Vector probe = z;
      auto g = [&](double t) {
        probe[k] = t;
        return objective(probe);
      };
      double arg = z[k];
      const double v = golden_max(g, z[k] - half, z[k] + half, steps, &arg);
      if (v >= best_value) {
        best_value = v;
        z[k] = arg;
      }
    }
    half *= 0.5;
  }
  if (best_value > options.blowup_threshold) return {ExtendedReal::plus_infinity(), {}};
  return {best_value, z};
}

ConjugateResult conjugate_with_argmax(const ConvexIntegrand& f, VectorRef x, VectorRef zstar,
                                      const ConjugateOptions& options) {
  require_dimension(zstar, f.dimension(), "conjugate argument");
  if (auto closed = f.model().closed_form_conjugate(x, zstar)) return *closed;
  return conjugate_search(f, x, zstar, options);
}

ExtendedReal conjugate(const ConvexIntegrand& f, VectorRef x, VectorRef zstar,
                       const ConjugateOptions& options) {
  if (zstar.size() == f.dimension()) {
    if (auto v = f.model().closed_form_conjugate_value(x, zstar)) return *v;
  }
  return conjugate_with_argmax(f, x, zstar, options).value;
}

double recession(const ConvexIntegrand& f, VectorRef x, VectorRef z,
                 const RecessionOptions& options) {
  require_dimension(z, f.dimension(), "recession argument");
  if (z.norm() == 0.0) return 0.0;
  const Vector zero = Vector::Zero(z.size());
  const double f0 = f(x, zero);
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int k = options.k_min; k <= options.k_max; ++k) {
    const double t = std::ldexp(1.0, k);
    const Vector tz = t * z;
    const double quotient = (f(x, tz) - f0) / t;
    if (!std::isnan(previous)) {
      const double diff = std::abs(quotient - previous);
      if (diff < options.tol * std::max(1.0, std::abs(quotient))) {
        // The quotient is monotone with an O(1/t) defect; one Richardson
        // step removes the leading term.
        return std::max(0.0, 2.0 * quotient - previous);
      }
    }
    previous = quotient;
  }
  throw NoConvergence("recession quotient of " + f.name() +
                      " did not settle; the integrand may not grow linearly");
}

Vector subgradient(const ConvexIntegrand& f, VectorRef x, VectorRef z) {
  require_dimension(z, f.dimension(), "subgradient argument");
  Vector g = f.model().gradient(x, z);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g[k])) throw NonFiniteEval("gradient of " + f.name() + " is not finite");
  }
  return g;
}

Vector subgradient_element(const ConvexIntegrand& f, VectorRef x, VectorRef z) {
  require_dimension(z, f.dimension(), "subgradient argument");
  return f.model().subgradient_element(x, z);
}

ConvexIntegrand mollify(const ConvexIntegrand& f, double delta, int nodes) {
  return ConvexIntegrand(std::make_shared<MollifiedModel>(f, delta, nodes));
}

double e_class_transform(const ConvexIntegrand& f, VectorRef x, VectorRef z) {
  const double r = z.norm();
  if (!(r < 1.0)) throw DomainError("E-class transform needs |z| < 1");
  const Vector y = z / (1.0 - r);
  return (1.0 - r) * f(x, y);
}

double e_class_extension(const ConvexIntegrand& f, VectorRef x, VectorRef z) {
  const double r = z.norm();
  if (r > 1.0 + 1e-12) throw DomainError("E-class extension lives on the closed unit ball");
  if (r < 1.0) return e_class_transform(f, x, z);
  return recession(f, x, z);
}

// ---------------------------------------------------------------------------

GrowthReport verify_growth(const ConvexIntegrand& f, const GrowthSampleSpec& spec) {
  const int n = f.dimension();
  const double m = f.growth_constant();
  const double tol = spec.tolerance;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(-spec.radius, spec.radius);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Vector> xs = spec.x_samples;
  if (xs.empty()) xs.push_back(Vector::Zero(1));

  std::map<std::string, GrowthViolation> worst;
  auto record = [&](const std::string& check, double amount, VectorRef x, VectorRef z) {
    if (amount <= tol) return;
    auto it = worst.find(check);
    if (it == worst.end() || amount > it->second.amount) {
      worst[check] = GrowthViolation{check, amount, x, z};
    }
  };

  auto draw = [&]() {
    Vector z(n);
    // Mix scales so both the small-|z| and the asymptotic regimes are hit.
    const double scale = std::pow(10.0, -2.0 + 3.0 * unit(rng)) / 10.0;
    for (int k = 0; k < n; ++k) z[k] = uniform(rng) * (unit(rng) < 0.5 ? 1.0 : scale * 10.0);
    return z;
  };

  int checked = 0;
  for (const Vector& x : xs) {
    for (int s = 0; s < spec.z_samples; ++s) {
      const Vector z1 = draw();
      const Vector z2 = draw();
      const double f1 = f(x, z1);
      const double f2 = f(x, z2);
      const double r1 = z1.norm();
      record("growth_lower", (r1 - 1.0) / m - f1, x, z1);
      record("growth_upper", f1 - m * (1.0 + r1), x, z1);
      for (double t : {0.25, 0.5, 0.75}) {
        const Vector zt = t * z1 + (1.0 - t) * z2;
        record("convexity", f(x, zt) - (t * f1 + (1.0 - t) * f2), x, zt);
      }
      record("lipschitz", std::abs(f1 - f2) - m * (z1 - z2).norm(), x, z1);
      for (const Vector& y : xs) {
        if (&y == &x) continue;
        const double bound = f.modulus((x - y).norm()) * (1.0 + r1);
        record("modulus", std::abs(f1 - f(y, z1)) - bound, x, z1);
      }
      ++checked;
    }
  }
  GrowthReport report;
  report.samples_checked = checked;
  for (auto& [_, v] : worst) report.violations.push_back(v);
  return report;
}

}  // namespace mdual
