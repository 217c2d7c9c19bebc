#pragma once

#include <iosfwd>
#include <limits>

namespace mdual {

/// A real number or one of the two infinities, with the arithmetic
/// conventions of convex analysis: a + (+inf) = +inf for every a > -inf.
/// Adding +inf and -inf is undefined and throws DomainError.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  /// Accepts finite values and infinities; NaN throws DomainError.
  ExtendedReal(double v);  // NOLINT(google-explicit-constructor)

  static constexpr ExtendedReal plus_infinity() {
    return ExtendedReal(Raw{}, std::numeric_limits<double>::infinity());
  }
  static constexpr ExtendedReal minus_infinity() {
    return ExtendedReal(Raw{}, -std::numeric_limits<double>::infinity());
  }

  constexpr bool is_finite() const { return value_ - value_ == 0.0; }
  constexpr bool is_plus_infinity() const {
    return value_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_minus_infinity() const {
    return value_ == -std::numeric_limits<double>::infinity();
  }

  /// The stored double (possibly +/-inf).
  constexpr double value() const { return value_; }
  /// The value, throwing DomainError when infinite.
  double finite_value() const;

  ExtendedReal operator-() const { return ExtendedReal(Raw{}, -value_); }
  ExtendedReal& operator+=(ExtendedReal other);
  ExtendedReal& operator-=(ExtendedReal other) { return *this += -other; }
  ExtendedReal& operator*=(double scale);

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) { return a += b; }
  friend ExtendedReal operator-(ExtendedReal a, ExtendedReal b) { return a -= b; }
  friend ExtendedReal operator*(ExtendedReal a, double s) { return a *= s; }
  friend ExtendedReal operator*(double s, ExtendedReal a) { return a *= s; }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.value_ == b.value_;
  }
  friend constexpr bool operator<(ExtendedReal a, ExtendedReal b) {
    return a.value_ < b.value_;
  }
  friend constexpr bool operator<=(ExtendedReal a, ExtendedReal b) {
    return a.value_ <= b.value_;
  }
  friend constexpr bool operator>(ExtendedReal a, ExtendedReal b) { return b < a; }
  friend constexpr bool operator>=(ExtendedReal a, ExtendedReal b) { return b <= a; }

 private:
  struct Raw {};
  constexpr ExtendedReal(Raw, double v) : value_(v) {}

  double value_ = 0.0;
};

std::ostream& operator<<(std::ostream& os, ExtendedReal x);

}  // namespace mdual
