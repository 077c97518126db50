#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/measures/parametric.hpp"
#include "mispec/measures/tail_class.hpp"

namespace mispec {

enum class RatioStatus { Finite, SupportViolation, UnboundedTail };

/// Outcome of bounding the density ratio dq/dp over the support of p.
struct DensityRatio {
  double sup = 1.0;      // +inf unless status == Finite
  double log_sup = 0.0;
  std::optional<double> argsup;  // a point attaining (or approaching) the sup
  RatioStatus status = RatioStatus::Finite;
  std::optional<Side> unbounded_side;
  std::optional<double> violation_point;  // for SupportViolation
  bool analytic = true;
};

/// Number of grid points used by the grid fallback and grid verifiers.
inline constexpr int kGridPoints = 10000;
/// Mass left outside the grid window of a law.
inline constexpr double kGridTailMass = 1e-12;

namespace detail {

inline std::optional<double> support_violation(const ParametricDistribution& q, const ParametricDistribution& p) {
  auto ps = p.support_intervals();
  for (const auto& iq : q.support_intervals()) {
    bool covered = false;
    for (const auto& ip : ps)
      if (ip.lo <= iq.lo && iq.hi <= ip.hi) covered = true;
    if (covered) continue;
    // Find a point of iq outside every interval of p.
    std::vector<double> probes{iq.lo, iq.hi};
    for (const auto& ip : ps) {
      probes.push_back(ip.lo - 0.5);
      probes.push_back(ip.hi + 0.5);
    }
    if (std::isfinite(iq.lo) && std::isfinite(iq.hi)) probes.push_back(0.5 * (iq.lo + iq.hi));
    for (double x : probes) {
      if (!std::isfinite(x)) continue;
      if (x < iq.lo || x > iq.hi) continue;
      bool inside = false;
      for (const auto& ip : ps)
        if (ip.lo <= x && x <= ip.hi) inside = true;
      if (!inside) return x;
    }
    if (std::isfinite(iq.hi)) return iq.hi;
    if (std::isfinite(iq.lo)) return iq.lo;
    return 0.0;
  }
  return std::nullopt;
}

/// sup of a x^2 + b x + c over [lo, hi] (either end may be infinite).
inline std::pair<double, double> sup_quadratic(double a, double b, double c, double lo, double hi) {
  auto f = [&](double x) { return (a * x + b) * x + c; };
  double best = -kInf, arg = lo;
  auto consider = [&](double v, double x) {
    if (v > best) {
      best = v;
      arg = x;
    }
  };
  auto limit = [&](double dir) {
    if (a != 0) return a > 0 ? kInf : -kInf;
    double slope = b * dir;
    if (slope > 0) return kInf;
    if (slope < 0) return -kInf;
    return c;
  };
  if (std::isfinite(lo)) consider(f(lo), lo); else consider(limit(-1.0), lo);
  if (std::isfinite(hi)) consider(f(hi), hi); else consider(limit(1.0), hi);
  if (a < 0) {
    double v = -b / (2.0 * a);
    if (v > lo && v < hi) consider(f(v), v);
  }
  return {best, arg};
}

inline double log_ratio_at(const ParametricDistribution& q, const ParametricDistribution& p, double x) {
  double lq = q.log_pdf(x);
  if (lq == -kInf) return -kInf;
  double lp = p.log_pdf(x);
  if (lp == -kInf) return kInf;
  return lq - lp;
}

inline DensityRatio grid_ratio(const ParametricDistribution& q, const ParametricDistribution& p) {
  DensityRatio out;
  out.analytic = false;
  Interval qs = q.support();
  double lo = std::min(p.tail_point(Side::Left, 0.5 * kGridTailMass), q.tail_point(Side::Left, 0.5 * kGridTailMass));
  double hi = std::max(p.tail_point(Side::Right, 0.5 * kGridTailMass), q.tail_point(Side::Right, 0.5 * kGridTailMass));
  lo = std::max(lo, qs.lo);
  hi = std::min(hi, qs.hi);
  std::vector<double> xs;
  xs.reserve(kGridPoints + 64);
  for (int i = 0; i < kGridPoints; ++i) xs.push_back(lo + (hi - lo) * i / (kGridPoints - 1));
  auto add_near = [&](double b) {
    if (!std::isfinite(b)) return;
    for (double d : {0.0, 1e-9, -1e-9})
      if (b + d >= lo && b + d <= hi) xs.push_back(b + d);
  };
  for (double b : q.breakpoints()) add_near(b);
  for (double b : p.breakpoints()) add_near(b);
  std::sort(xs.begin(), xs.end());

  double best = -kInf, arg = lo;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double v = log_ratio_at(q, p, xs[i]);
    if (v > best) {
      best = v;
      arg = xs[i];
      best_i = i;
    }
  }
  // Golden-section refinement between the neighbours of the best grid point.
  if (xs.size() > 2) {
    double a = xs[best_i == 0 ? 0 : best_i - 1];
    double b = xs[std::min(best_i + 1, xs.size() - 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80 && b - a > 1e-14 * (1.0 + std::fabs(a)); ++it) {
      double c = b - g * (b - a), d = a + g * (b - a);
      if (log_ratio_at(q, p, c) > log_ratio_at(q, p, d)) b = d; else a = c;
    }
    double m = 0.5 * (a + b);
    double v = log_ratio_at(q, p, m);
    if (v > best) {
      best = v;
      arg = m;
    }
  }
  // Beyond the window the tail classes are not heavier, so the ratio tends
  // to a constant or to zero; probe geometrically outwards.
  double scale = std::max(1.0, hi - lo);
  for (Side side : {Side::Left, Side::Right}) {
    if (q.tail(side).is_compact()) continue;
    double start = side == Side::Right ? hi : lo;
    double dir = side == Side::Right ? 1.0 : -1.0;
    for (double step = 1e-3 * scale; step < 1e4 * scale; step *= 1.5) {
      double x = start + dir * step;
      double v = log_ratio_at(q, p, x);
      if (v > best) {
        best = v;
        arg = x;
      }
    }
  }
  out.log_sup = best;
  out.sup = std::exp(best);
  out.argsup = arg;
  return out;
}

}  // namespace detail

/// Bounds sup dq/dp over the support of p.
///
/// Support inclusion and one-sided tail classes decide finiteness. When both
/// log-densities are piecewise quadratic the sup is computed in closed form
/// piece by piece; otherwise a 10^4-point grid over the window holding all
/// but 1e-12 of either law's mass is refined locally.
inline DensityRatio analyze_density_ratio(const ParametricDistribution& q, const ParametricDistribution& p) {
  if (q.is_atomic() || p.is_atomic())
    throw Error(ErrorCode::UnsupportedPair, "density ratio undefined for atomic laws (" + q.describe() + ", " + p.describe() + ")");
  DensityRatio out;
  if (auto x = detail::support_violation(q, p)) {
    out.status = RatioStatus::SupportViolation;
    out.sup = kInf;
    out.log_sup = kInf;
    out.violation_point = *x;
    return out;
  }
  for (Side side : {Side::Left, Side::Right}) {
    TailClass tq = q.tail(side);
    if (tq.is_compact()) continue;
    if (compare_heaviness(tq, p.tail(side)) > 0) {
      out.status = RatioStatus::UnboundedTail;
      out.unbounded_side = side;
      out.sup = kInf;
      out.log_sup = kInf;
      return out;
    }
  }
  if (q == p) {
    out.sup = 1.0;
    out.log_sup = 0.0;
    return out;
  }
  auto pq = q.log_density_pieces();
  auto pp = p.log_density_pieces();
  if (!pq || !pp) return detail::grid_ratio(q, p);

  double best = -kInf;
  std::optional<double> arg;
  for (const auto& a : *pq) {
    for (const auto& b : *pp) {
      double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
      if (!(lo < hi)) continue;
      auto [v, x] = detail::sup_quadratic(a.a - b.a, a.b - b.b, a.c - b.c, lo, hi);
      if (v > best) {
        best = v;
        arg = x;
      }
    }
  }
  if (best == kInf) {
    out.status = RatioStatus::UnboundedTail;
    out.sup = kInf;
    out.log_sup = kInf;
    out.unbounded_side = (arg && *arg < 0) ? Side::Left : Side::Right;
    return out;
  }
  out.log_sup = best;
  out.sup = std::exp(best);
  out.argsup = arg;
  return out;
}

/// sup over supp(p) of density(q)/density(p); +inf when unbounded.
inline double density_ratio_sup(const ParametricDistribution& q, const ParametricDistribution& p) {
  return analyze_density_ratio(q, p).sup;
}

/// log P(|X| > r).
inline double log_tail_probability(const ParametricDistribution& p, double r) {
  if (!(r >= 0)) throw Error(ErrorCode::InvalidArgument, "radius must be non-negative");
  double right = p.log_survival(r);
  double left;
  if (const auto* pm = std::get_if<PointMass>(&p.variant())) {
    left = pm->location < -r ? 0.0 : -kInf;
  } else {
    left = p.log_cdf(-r);
  }
  if (r == 0 && !p.is_atomic()) return 0.0;
  return detail::log_add(left, right);
}

/// P(|X| > r) from the closed-form survival functions.
inline double tail_probability(const ParametricDistribution& p, double r) {
  double l = log_tail_probability(p, r);
  return l == -kInf ? 0.0 : std::min(1.0, std::exp(l));
}

}  // namespace mispec
