#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/core/scalar.hpp"
#include "mispec/measures/tail_class.hpp"

namespace mispec {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

namespace detail {

inline double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

/// log(exp(a) - exp(b)) for a >= b.
inline double log_sub(double a, double b) {
  if (b == -kInf) return a;
  if (b >= a) return -kInf;
  return a + std::log1p(-std::exp(b - a));
}

/// log P(Z > z) for a standard normal, accurate far into the upper tail.
inline double log_normal_sf(double z) {
  if (z < 25.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  double z2 = z * z;
  double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

}  // namespace detail

/// One smooth piece of a log-density: log f(x) = a x^2 + b x + c on [lo, hi].
struct LogQuadraticPiece {
  double lo;
  double hi;
  double a;
  double b;
  double c;

  double eval(double x) const { return (a * x + b) * x + c; }
};

class ParametricDistribution;
using ParametricPtr = std::shared_ptr<const ParametricDistribution>;

enum class Orientation { Right, Mirrored };

struct Normal {
  double mean;
  double variance;
};
struct Laplace {
  double location;
  double scale;
};
struct Exponential {
  double rate;
  Orientation orientation = Orientation::Right;
};
struct Uniform {
  double a;
  double b;
};
struct PointMass {
  double location;
};
struct Truncated {
  ParametricPtr inner;
  double a;  // inclusive
  double b;  // exclusive
  double log_mass;
};
struct MixtureComponent {
  double weight;
  ParametricPtr law;
};
struct Mixture {
  std::vector<MixtureComponent> components;
};

enum class Family { Normal, Laplace, Exponential, Uniform, PointMass, Truncated, Mixture };

/// Tagged one-dimensional law with closed-form density, distribution and tail
/// evaluators. Values are immutable once built.
class ParametricDistribution {
 public:
  using Variant = std::variant<Normal, Laplace, Exponential, Uniform, PointMass, Truncated, Mixture>;

  static ParametricDistribution normal(double mean, double variance) {
    require_finite(mean, "mean");
    if (!(variance > 0) || !std::isfinite(variance))
      throw Error(ErrorCode::ValidationError, "normal variance must be positive");
    return ParametricDistribution(Normal{mean, variance});
  }

  static ParametricDistribution laplace(double location, double scale) {
    require_finite(location, "location");
    if (!(scale > 0) || !std::isfinite(scale))
      throw Error(ErrorCode::ValidationError, "laplace scale must be positive");
    return ParametricDistribution(Laplace{location, scale});
  }

  static ParametricDistribution exponential(double rate, Orientation orientation = Orientation::Right) {
    if (!(rate > 0) || !std::isfinite(rate))
      throw Error(ErrorCode::ValidationError, "exponential rate must be positive");
    return ParametricDistribution(Exponential{rate, orientation});
  }

  static ParametricDistribution uniform(double a, double b) {
    require_finite(a, "a");
    require_finite(b, "b");
    if (!(a < b)) throw Error(ErrorCode::ValidationError, "uniform requires a < b");
    return ParametricDistribution(Uniform{a, b});
  }

  static ParametricDistribution point_mass(double location) {
    require_finite(location, "location");
    return ParametricDistribution(PointMass{location});
  }

  /// Restriction of `inner` to [a, b). Returns `inner` itself when the interval
  /// covers its whole support; throws ZeroMassCell when it carries no mass.
  static ParametricDistribution truncated(const ParametricDistribution& inner, double a, double b) {
    if (std::isnan(a) || std::isnan(b) || !(a < b))
      throw Error(ErrorCode::ValidationError, "truncation interval requires a < b");
    if (const auto* pm = std::get_if<PointMass>(&inner.family_)) {
      if (pm->location >= a && pm->location < b) return inner;
      throw Error(ErrorCode::ZeroMassCell, "interval carries no mass");
    }
    Interval s = inner.support();
    if (a <= s.lo && b >= s.hi) return inner;
    double log_mass = inner.log_mass_between(a, b);
    if (!(log_mass > -kInf)) throw Error(ErrorCode::ZeroMassCell, "interval carries no mass");
    double lo = std::max(a, s.lo);
    double hi = std::min(b, s.hi);
    if (const auto* t = std::get_if<Truncated>(&inner.family_)) {
      // Collapse nested truncations onto the innermost law.
      return truncated(*t->inner, std::max(lo, t->a), std::min(hi, t->b));
    }
    return ParametricDistribution(Truncated{std::make_shared<const ParametricDistribution>(inner), a, b, log_mass});
  }

  static ParametricDistribution mixture(std::vector<std::pair<double, ParametricDistribution>> parts) {
    if (parts.empty()) throw Error(ErrorCode::ValidationError, "mixture needs at least one component");
    double total = 0.0;
    for (const auto& [w, law] : parts) {
      if (!(w > 0) || !std::isfinite(w)) throw Error(ErrorCode::ValidationError, "mixture weights must be positive");
      if (law.is_atomic()) throw Error(ErrorCode::ValidationError, "mixture components must be non-atomic");
      total += w;
    }
    if (std::fabs(total - 1.0) > kFloatTolerance)
      throw Error(ErrorCode::ValidationError, "mixture weights must sum to 1");
    Mixture m;
    for (auto& [w, law] : parts) m.components.push_back({w / total, std::make_shared<const ParametricDistribution>(std::move(law))});
    return ParametricDistribution(std::move(m));
  }

  const Variant& variant() const noexcept { return family_; }

  Family family() const { return static_cast<Family>(family_.index()); }

  bool is_atomic() const { return std::holds_alternative<PointMass>(family_); }

  // ---------------------------------------------------------------- support

  Interval support() const {
    return std::visit(
        [](const auto& f) -> Interval {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Normal> || std::is_same_v<F, Laplace>) {
            return {-kInf, kInf};
          } else if constexpr (std::is_same_v<F, Exponential>) {
            return f.orientation == Orientation::Right ? Interval{0.0, kInf} : Interval{-kInf, 0.0};
          } else if constexpr (std::is_same_v<F, Uniform>) {
            return {f.a, f.b};
          } else if constexpr (std::is_same_v<F, PointMass>) {
            return {f.location, f.location};
          } else if constexpr (std::is_same_v<F, Truncated>) {
            Interval s = f.inner->support();
            return {std::max(s.lo, f.a), std::min(s.hi, f.b)};
          } else {
            Interval out{kInf, -kInf};
            for (const auto& c : f.components) {
              Interval s = c.law->support();
              out.lo = std::min(out.lo, s.lo);
              out.hi = std::max(out.hi, s.hi);
            }
            return out;
          }
        },
        family_);
  }

  /// Support as a sorted list of disjoint closed intervals.
  std::vector<Interval> support_intervals() const {
    if (const auto* m = std::get_if<Mixture>(&family_)) {
      std::vector<Interval> all;
      for (const auto& c : m->components) {
        auto part = c.law->support_intervals();
        all.insert(all.end(), part.begin(), part.end());
      }
      std::sort(all.begin(), all.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
      std::vector<Interval> merged;
      for (const auto& iv : all) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
          merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
          merged.push_back(iv);
        }
      }
      return merged;
    }
    if (const auto* t = std::get_if<Truncated>(&family_)) {
      std::vector<Interval> out;
      for (auto iv : t->inner->support_intervals()) {
        iv.lo = std::max(iv.lo, t->a);
        iv.hi = std::min(iv.hi, t->b);
        if (iv.lo < iv.hi) out.push_back(iv);
      }
      return out;
    }
    return {support()};
  }

  // ---------------------------------------------------------------- density

  double pdf(double x) const {
    double lp = log_pdf(x);
    return lp == -kInf ? 0.0 : std::exp(lp);
  }

  /// Log-density; -inf off the (closed) support. Atomic laws have no density.
  double log_pdf(double x) const {
    return std::visit(
        [x](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Normal>) {
            double d = x - f.mean;
            return -0.5 * d * d / f.variance - 0.5 * std::log(2.0 * std::numbers::pi * f.variance);
          } else if constexpr (std::is_same_v<F, Laplace>) {
            return -std::fabs(x - f.location) / f.scale - std::log(2.0 * f.scale);
          } else if constexpr (std::is_same_v<F, Exponential>) {
            double t = f.orientation == Orientation::Right ? x : -x;
            if (t < 0) return -kInf;
            return std::log(f.rate) - f.rate * t;
          } else if constexpr (std::is_same_v<F, Uniform>) {
            if (x < f.a || x > f.b) return -kInf;
            return -std::log(f.b - f.a);
          } else if constexpr (std::is_same_v<F, PointMass>) {
            return -kInf;
          } else if constexpr (std::is_same_v<F, Truncated>) {
            if (x < f.a || x > f.b) return -kInf;
            return f.inner->log_pdf(x) - f.log_mass;
          } else {
            double acc = -kInf;
            for (const auto& c : f.components) acc = detail::log_add(acc, std::log(c.weight) + c.law->log_pdf(x));
            return acc;
          }
        },
        family_);
  }

  // ----------------------------------------------------------- distribution

  /// P(X <= x).
  double cdf(double x) const {
    double l = log_cdf(x);
    return l == -kInf ? 0.0 : std::exp(l);
  }

  /// P(X > x).
  double survival(double x) const {
    double l = log_survival(x);
    return l == -kInf ? 0.0 : std::exp(l);
  }

  /// log P(X > x).
  double log_survival(double x) const {
    return std::visit(
        [x](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Normal>) {
            return detail::log_normal_sf((x - f.mean) / std::sqrt(f.variance));
          } else if constexpr (std::is_same_v<F, Laplace>) {
            double z = (x - f.location) / f.scale;
            if (z >= 0) return std::log(0.5) - z;
            return std::log1p(-0.5 * std::exp(z));
          } else if constexpr (std::is_same_v<F, Exponential>) {
            if (f.orientation == Orientation::Right) return x < 0 ? 0.0 : -f.rate * x;
            if (x >= 0) return -kInf;
            return std::log1p(-std::exp(f.rate * x));
          } else if constexpr (std::is_same_v<F, Uniform>) {
            if (x < f.a) return 0.0;
            if (x >= f.b) return -kInf;
            return std::log((f.b - x) / (f.b - f.a));
          } else if constexpr (std::is_same_v<F, PointMass>) {
            return x < f.location ? 0.0 : -kInf;
          } else if constexpr (std::is_same_v<F, Truncated>) {
            if (x < f.a) return 0.0;
            if (x >= f.b) return -kInf;
            return f.inner->log_mass_between(x, f.b) - f.log_mass;
          } else {
            double acc = -kInf;
            for (const auto& c : f.components) acc = detail::log_add(acc, std::log(c.weight) + c.law->log_survival(x));
            return acc;
          }
        },
        family_);
  }

  /// log P(X <= x) (equal to log P(X < x) for non-atomic laws).
  double log_cdf(double x) const {
    return std::visit(
        [x](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Normal>) {
            return detail::log_normal_sf(-(x - f.mean) / std::sqrt(f.variance));
          } else if constexpr (std::is_same_v<F, Laplace>) {
            double z = (x - f.location) / f.scale;
            if (z <= 0) return std::log(0.5) + z;
            return std::log1p(-0.5 * std::exp(-z));
          } else if constexpr (std::is_same_v<F, Exponential>) {
            if (f.orientation == Orientation::Mirrored) return x >= 0 ? 0.0 : f.rate * x;
            if (x <= 0) return -kInf;
            return std::log1p(-std::exp(-f.rate * x));
          } else if constexpr (std::is_same_v<F, Uniform>) {
            if (x <= f.a) return -kInf;
            if (x >= f.b) return 0.0;
            return std::log((x - f.a) / (f.b - f.a));
          } else if constexpr (std::is_same_v<F, PointMass>) {
            return x >= f.location ? 0.0 : -kInf;
          } else if constexpr (std::is_same_v<F, Truncated>) {
            if (x <= f.a) return -kInf;
            if (x >= f.b) return 0.0;
            return f.inner->log_mass_between(f.a, x) - f.log_mass;
          } else {
            double acc = -kInf;
            for (const auto& c : f.components) acc = detail::log_add(acc, std::log(c.weight) + c.law->log_cdf(x));
            return acc;
          }
        },
        family_);
  }

  /// log P(a <= X < b), evaluated on whichever side keeps precision.
  double log_mass_between(double a, double b) const {
    if (!(a < b)) return -kInf;
    if (is_atomic()) {
      double loc = std::get<PointMass>(family_).location;
      return (loc >= a && loc < b) ? 0.0 : -kInf;
    }
    double log_half = std::log(0.5);
    double ls_a = log_survival(a);
    if (ls_a < log_half) return detail::log_sub(ls_a, log_survival(b));
    double lc_b = log_cdf(b);
    if (lc_b < log_half) return detail::log_sub(lc_b, log_cdf(a));
    double m = std::exp(lc_b) - std::exp(log_cdf(a));
    return m > 0 ? std::log(m) : -kInf;
  }

  double mass_between(double a, double b) const {
    double l = log_mass_between(a, b);
    return l == -kInf ? 0.0 : std::exp(l);
  }

  /// Smallest x with P(X > x) <= delta (right) or largest x with P(X < x) <= delta (left).
  double tail_point(Side side, double delta) const {
    Interval s = support();
    double target = std::log(delta);
    auto excess = [&](double x) { return side == Side::Right ? log_survival(x) > target : log_cdf(x) > target; };
    if (side == Side::Right && std::isfinite(s.hi)) return s.hi;
    if (side == Side::Left && std::isfinite(s.lo)) return s.lo;
    double dir = side == Side::Right ? 1.0 : -1.0;
    double inside = std::isfinite(side == Side::Right ? s.lo : s.hi) ? (side == Side::Right ? s.lo : s.hi) : 0.0;
    double step = 1.0;
    double outside = inside + dir * step;
    while (excess(outside)) {
      inside = outside;
      step *= 2.0;
      outside = inside + dir * step;
      if (step > 1e12) break;
    }
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (inside + outside);
      if (excess(mid)) inside = mid; else outside = mid;
    }
    return outside;
  }

  // ------------------------------------------------------------------ tails

  TailClass tail(Side side) const {
    return std::visit(
        [side](const auto& f) -> TailClass {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Normal>) {
            double lin = side == Side::Right ? -f.mean / f.variance : f.mean / f.variance;
            return TailClass::gaussian(0.5 / f.variance, lin);
          } else if constexpr (std::is_same_v<F, Laplace>) {
            return TailClass::exponential(1.0 / f.scale);
          } else if constexpr (std::is_same_v<F, Exponential>) {
            bool open = (f.orientation == Orientation::Right) == (side == Side::Right);
            return open ? TailClass::exponential(f.rate) : TailClass::compact();
          } else if constexpr (std::is_same_v<F, Uniform> || std::is_same_v<F, PointMass>) {
            return TailClass::compact();
          } else if constexpr (std::is_same_v<F, Truncated>) {
            double bound = side == Side::Right ? f.b : f.a;
            if (std::isfinite(bound)) return TailClass::compact();
            return f.inner->tail(side);
          } else {
            TailClass out = TailClass::compact();
            for (const auto& c : f.components) out = heavier_of(out, c.law->tail(side));
            return out;
          }
        },
        family_);
  }

  /// Tail class of |X|: the heavier of the two one-sided tails.
  TailClass abs_tail() const { return heavier_of(tail(Side::Left), tail(Side::Right)); }

  /// Piecewise log-quadratic representation of the density, or nullopt for
  /// mixtures and atoms.
  std::optional<std::vector<LogQuadraticPiece>> log_density_pieces() const {
    return std::visit(
        [](const auto& f) -> std::optional<std::vector<LogQuadraticPiece>> {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Normal>) {
            double a = -0.5 / f.variance;
            double b = f.mean / f.variance;
            double c = -0.5 * f.mean * f.mean / f.variance - 0.5 * std::log(2.0 * std::numbers::pi * f.variance);
            return std::vector<LogQuadraticPiece>{{-kInf, kInf, a, b, c}};
          } else if constexpr (std::is_same_v<F, Laplace>) {
            double ln = std::log(2.0 * f.scale);
            double m = f.location, s = f.scale;
            return std::vector<LogQuadraticPiece>{{-kInf, m, 0.0, 1.0 / s, -m / s - ln},
                                                  {m, kInf, 0.0, -1.0 / s, m / s - ln}};
          } else if constexpr (std::is_same_v<F, Exponential>) {
            double c = std::log(f.rate);
            if (f.orientation == Orientation::Right) return std::vector<LogQuadraticPiece>{{0.0, kInf, 0.0, -f.rate, c}};
            return std::vector<LogQuadraticPiece>{{-kInf, 0.0, 0.0, f.rate, c}};
          } else if constexpr (std::is_same_v<F, Uniform>) {
            return std::vector<LogQuadraticPiece>{{f.a, f.b, 0.0, 0.0, -std::log(f.b - f.a)}};
          } else if constexpr (std::is_same_v<F, Truncated>) {
            auto inner = f.inner->log_density_pieces();
            if (!inner) return std::nullopt;
            std::vector<LogQuadraticPiece> out;
            for (auto p : *inner) {
              p.lo = std::max(p.lo, f.a);
              p.hi = std::min(p.hi, f.b);
              p.c -= f.log_mass;
              if (p.lo < p.hi) out.push_back(p);
            }
            return out;
          } else {
            return std::nullopt;
          }
        },
        family_);
  }

  /// Points where the density may be non-smooth (kinks, support endpoints).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    std::visit(
        [&out](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Laplace>) {
            out.push_back(f.location);
          } else if constexpr (std::is_same_v<F, Exponential>) {
            out.push_back(0.0);
          } else if constexpr (std::is_same_v<F, Uniform>) {
            out.push_back(f.a);
            out.push_back(f.b);
          } else if constexpr (std::is_same_v<F, PointMass>) {
            out.push_back(f.location);
          } else if constexpr (std::is_same_v<F, Truncated>) {
            out = f.inner->breakpoints();
            if (std::isfinite(f.a)) out.push_back(f.a);
            if (std::isfinite(f.b)) out.push_back(f.b);
          } else if constexpr (std::is_same_v<F, Mixture>) {
            for (const auto& c : f.components) {
              auto part = c.law->breakpoints();
              out.insert(out.end(), part.begin(), part.end());
            }
          }
        },
        family_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// True when the density is continuous and strictly positive on the
  /// support (the hypothesis of the compact-support characterization).
  bool has_continuous_positive_density() const {
    return std::visit(
        [](const auto& f) -> bool {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, PointMass>) {
            return false;
          } else if constexpr (std::is_same_v<F, Truncated>) {
            return f.inner->has_continuous_positive_density();
          } else if constexpr (std::is_same_v<F, Mixture>) {
            for (const auto& c : f.components)
              if (!c.law->has_continuous_positive_density()) return false;
            return true;
          } else {
            return true;
          }
        },
        family_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using F = std::decay_t<decltype(f)>;
          auto n = [](double v) { return format_short(v); };
          if constexpr (std::is_same_v<F, Normal>) {
            return "Normal(" + n(f.mean) + "," + n(f.variance) + ")";
          } else if constexpr (std::is_same_v<F, Laplace>) {
            return "Laplace(" + n(f.location) + "," + n(f.scale) + ")";
          } else if constexpr (std::is_same_v<F, Exponential>) {
            return std::string(f.orientation == Orientation::Right ? "Exponential(" : "MirroredExponential(") +
                   n(f.rate) + ")";
          } else if constexpr (std::is_same_v<F, Uniform>) {
            return "Uniform(" + n(f.a) + "," + n(f.b) + ")";
          } else if constexpr (std::is_same_v<F, PointMass>) {
            return "PointMass(" + n(f.location) + ")";
          } else if constexpr (std::is_same_v<F, Truncated>) {
            return "Truncated(" + f.inner->describe() + ",[" + n(f.a) + "," + n(f.b) + "))";
          } else {
            std::string s = "Mixture(";
            for (std::size_t i = 0; i < f.components.size(); ++i) {
              if (i) s += ",";
              s += n(f.components[i].weight) + "*" + f.components[i].law->describe();
            }
            return s + ")";
          }
        },
        family_);
  }

  friend bool operator==(const ParametricDistribution& x, const ParametricDistribution& y) {
    if (x.family_.index() != y.family_.index()) return false;
    return std::visit(
        [&y](const auto& f) -> bool {
          using F = std::decay_t<decltype(f)>;
          const auto& g = std::get<F>(y.family_);
          if constexpr (std::is_same_v<F, Normal>) {
            return f.mean == g.mean && f.variance == g.variance;
          } else if constexpr (std::is_same_v<F, Laplace>) {
            return f.location == g.location && f.scale == g.scale;
          } else if constexpr (std::is_same_v<F, Exponential>) {
            return f.rate == g.rate && f.orientation == g.orientation;
          } else if constexpr (std::is_same_v<F, Uniform>) {
            return f.a == g.a && f.b == g.b;
          } else if constexpr (std::is_same_v<F, PointMass>) {
            return f.location == g.location;
          } else if constexpr (std::is_same_v<F, Truncated>) {
            return f.a == g.a && f.b == g.b && *f.inner == *g.inner;
          } else {
            if (f.components.size() != g.components.size()) return false;
            for (std::size_t i = 0; i < f.components.size(); ++i)
              if (f.components[i].weight != g.components[i].weight || !(*f.components[i].law == *g.components[i].law))
                return false;
            return true;
          }
        },
        x.family_);
  }

 private:
  explicit ParametricDistribution(Variant v) : family_(std::move(v)) {}

  static void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw Error(ErrorCode::ValidationError, std::string(what) + " must be finite");
  }

  Variant family_;
};

}  // namespace mispec
