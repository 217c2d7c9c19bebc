#include "mdual/extended_real.hpp"

#include <cmath>
#include <ostream>

#include "mdual/errors.hpp"

namespace mdual {

ExtendedReal::ExtendedReal(double v) : value_(v) {
  if (std::isnan(v)) throw DomainError("ExtendedReal cannot hold NaN");
}

double ExtendedReal::finite_value() const {
  if (!is_finite()) throw DomainError("expected a finite extended real");
  return value_;
}

ExtendedReal& ExtendedReal::operator+=(ExtendedReal other) {
  if ((is_plus_infinity() && other.is_minus_infinity()) ||
      (is_minus_infinity() && other.is_plus_infinity())) {
    throw DomainError("+inf + -inf is undefined");
  }
  value_ += other.value_;
  return *this;
}

ExtendedReal& ExtendedReal::operator*=(double scale) {
  if (std::isnan(scale)) throw DomainError("scaling by NaN");
  if (!is_finite() && scale == 0.0) {
    // 0 * inf = 0, the integration convention for null sets.
    value_ = 0.0;
    return *this;
  }
  value_ *= scale;
  return *this;
}

std::ostream& operator<<(std::ostream& os, ExtendedReal x) {
  if (x.is_plus_infinity()) return os << "+inf";
  if (x.is_minus_infinity()) return os << "-inf";
  return os << x.value();
}

}  // namespace mdual
