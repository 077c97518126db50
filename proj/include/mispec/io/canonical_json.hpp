#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "json.hpp"
#include "mispec/core/error.hpp"
#include "mispec/core/scalar.hpp"

namespace mispec::io {

using Json = nlohmann::json;

namespace detail {

inline void dump_string(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

inline void dump_double(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += std::isnan(x) ? "\"nan\"" : (x > 0 ? "\"inf\"" : "\"-inf\"");
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

inline void dump(std::string& out, const Json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_string(out, it.key());
        out += indent < 0 ? ":" : ": ";
        dump(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        newline(depth + 1);
        dump(out, j[i], indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      dump_double(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Canonical text: sorted keys, floats as %.17g, non-finite floats as strings.
inline std::string canonical_dump(const Json& j, int indent = 2) {
  std::string out;
  detail::dump(out, j, indent, 0);
  if (indent >= 0) out += '\n';
  return out;
}

inline Json scalar_json(const Rational& r) { return format_rational(r); }
inline Json scalar_json(double x) { return x; }

/// Reads a probability-like value: "n/d" or decimal strings, or JSON numbers.
template <class T>
T scalar_from_json(const Json& j, const std::string& path) {
  Rational r;
  if (j.is_string()) {
    try {
      r = parse_rational(j.get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, e.message(), path);
    }
    if constexpr (is_exact_v<T>) {
      return r;
    } else {
      return r.get_d();
    }
  }
  if (j.is_number_integer()) {
    if constexpr (is_exact_v<T>) {
      return Rational(mpz_class(std::to_string(j.get<long long>()), 10));
    } else {
      return static_cast<double>(j.get<long long>());
    }
  }
  if (j.is_number()) {
    double x = j.get<double>();
    if constexpr (is_exact_v<T>) {
      return rational_from_double(x);
    } else {
      return x;
    }
  }
  throw Error(ErrorCode::ParseError, "expected a number or a rational string", path);
}

inline double real_from_json(const Json& j, const std::string& path) { return scalar_from_json<double>(j, path); }

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "expected an object", path);
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, "missing field '" + key + "'", path.empty() ? key : path + "." + key);
  return *it;
}

inline std::string join_path(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

}  // namespace mispec::io
