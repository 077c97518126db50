#pragma once

// Scalar support for the two arithmetic modes: exact rationals (GMP) for
// finite-state certificates and doubles with a fixed tolerance elsewhere.

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

#include "mispec/core/error.hpp"

namespace mispec {

using Rational = mpq_class;

enum class ArithmeticMode { Rational, Float };

/// Probability-sum tolerance used in float mode.
inline constexpr double kFloatTolerance = 1e-9;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double tolerance() { return kFloatTolerance; }
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational tolerance() { return Rational(0); }
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
};

template <class T>
inline constexpr bool is_exact_v = ScalarTraits<T>::exact;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

template <class T>
T abs_value(const T& x) {
  if constexpr (is_exact_v<T>) {
    return Rational(abs(x));
  } else {
    return std::fabs(x);
  }
}

template <class T>
bool nearly_equal(const T& a, const T& b, const T& tol) {
  if constexpr (is_exact_v<T>) {
    if (tol == 0) return a == b;
    return Rational(abs(a - b)) <= tol;
  } else {
    return std::fabs(a - b) <= tol;
  }
}

template <class T>
bool nearly_equal(const T& a, const T& b) {
  return nearly_equal(a, b, ScalarTraits<T>::tolerance());
}

/// Parses "n/d", integers, and decimal or scientific literals exactly.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw Error(ErrorCode::ParseError, "not a rational literal: '" + std::string(text) + "'");
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string num(text.substr(0, slash));
    std::string den(text.substr(slash + 1));
    auto digits = [](const std::string& s) {
      std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
      return i < s.size() &&
             std::all_of(s.begin() + static_cast<long>(i), s.end(),
                         [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    };
    if (!digits(num) || !digits(den)) return fail();
    if (num[0] == '+') num.erase(0, 1);
    if (den[0] == '+') den.erase(0, 1);
    mpz_class n(num, 10), d(den, 10);
    if (d == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
    Rational r(n, d);
    r.canonicalize();
    return r;
  }

  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  std::string mantissa;
  long exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return fail();
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return fail();
    ++i;
    long e = 0;
    auto rest = text.substr(i);
    if (!rest.empty() && rest[0] == '+') rest.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) return fail();
    exponent += e;
  }
  if (exponent > 4000 || exponent < -4000) return fail();
  mpz_class num(mantissa, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
  Rational r = exponent >= 0 ? Rational(num * scale) : Rational(num, scale);
  r.canonicalize();
  if (negative) r = -r;
  return r;
}

/// Exact rational for the shortest decimal that round-trips `x`.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, "non-finite number");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw Error(ErrorCode::ParseError, "cannot format number");
  return parse_rational(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

/// Canonical "num/den" rendering (integers included, e.g. "1/1").
inline std::string format_rational(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Fixed %.17g rendering used by canonical JSON.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Shortest round-trip rendering, used for human-facing labels.
inline std::string format_short(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string format_scalar(const Rational& r) { return format_rational(r); }
inline std::string format_scalar(double x) { return format_short(x); }

template <class T>
T scalar_from_rational(const Rational& r) {
  if constexpr (is_exact_v<T>) {
    return r;
  } else {
    return r.get_d();
  }
}

}  // namespace mispec
