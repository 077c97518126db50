#pragma once

#include <string>

namespace mispec {

enum class Side { Left, Right };

/// Asymptotic decay of a log-density along one direction of the real line.
///
/// With t the distance travelled towards infinity, the log-density behaves as
///   GaussianSquared: -quadratic * t^2 - linear * t
///   Exponential:     -linear * t
///   Polynomial:      -exponent * log t
/// and Compact means the law puts no mass beyond some finite point.
struct TailClass {
  enum class Kind { Compact = 0, GaussianSquared = 1, Exponential = 2, Polynomial = 3 };

  Kind kind = Kind::Compact;
  double quadratic = 0.0;
  double linear = 0.0;
  double exponent = 0.0;

  static TailClass compact() { return {}; }
  static TailClass gaussian(double quadratic, double linear) {
    return {Kind::GaussianSquared, quadratic, linear, 0.0};
  }
  static TailClass exponential(double rate) { return {Kind::Exponential, 0.0, rate, 0.0}; }
  static TailClass polynomial(double exponent) { return {Kind::Polynomial, 0.0, 0.0, exponent}; }

  bool is_compact() const { return kind == Kind::Compact; }

  std::string to_string() const {
    switch (kind) {
      case Kind::Compact: return "Compact";
      case Kind::GaussianSquared:
        return "GaussianSquared(" + std::to_string(quadratic) + "," + std::to_string(linear) + ")";
      case Kind::Exponential: return "Exponential(" + std::to_string(linear) + ")";
      case Kind::Polynomial: return "Polynomial(" + std::to_string(exponent) + ")";
    }
    return "?";
  }
};

namespace detail {
inline int compare_decay(double a, double b) {
  // Larger decay coefficient means a lighter tail.
  if (a > b) return -1;
  if (a < b) return 1;
  return 0;
}
}  // namespace detail

/// Total preorder on tails: returns +1 when `a` is heavier than `b`, -1 when
/// lighter, 0 when the density ratio tends to a finite positive constant.
inline int compare_heaviness(const TailClass& a, const TailClass& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind) ? 1 : -1;
  switch (a.kind) {
    case TailClass::Kind::Compact: return 0;
    case TailClass::Kind::GaussianSquared:
      if (int c = detail::compare_decay(a.quadratic, b.quadratic); c != 0) return c;
      return detail::compare_decay(a.linear, b.linear);
    case TailClass::Kind::Exponential: return detail::compare_decay(a.linear, b.linear);
    case TailClass::Kind::Polynomial: return detail::compare_decay(a.exponent, b.exponent);
  }
  return 0;
}

inline const TailClass& heavier_of(const TailClass& a, const TailClass& b) {
  return compare_heaviness(a, b) >= 0 ? a : b;
}

}  // namespace mispec
