#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/grain/certificate.hpp"
#include "mispec/measures/density_ratio.hpp"
#include "mispec/measures/parametric.hpp"

namespace mispec {

/// Relation between the |x|-tails of Q and P.
struct TailVerdict {
  enum class Relation { QHeavier, PHeavier, Comparable };
  Relation relation = Relation::Comparable;
  double c = 1.0;                 // grid sup of Q(|x|>r)/P(|x|>r); +inf when QHeavier
  std::optional<double> witness;  // first radius where the ratio exceeds kTailWitnessRatio
};

inline std::string to_string(TailVerdict::Relation r) {
  switch (r) {
    case TailVerdict::Relation::QHeavier: return "QHeavier";
    case TailVerdict::Relation::PHeavier: return "PHeavier";
    case TailVerdict::Relation::Comparable: return "Comparable";
  }
  return "?";
}

/// Ratio of tail masses that certifies divergence.
inline constexpr double kTailWitnessRatio = 1e6;

namespace detail {

/// Radius of the smallest centred interval holding all but `delta` of the mass.
inline double abs_radius(const ParametricDistribution& d, double delta) {
  Interval s = d.support();
  double r = 0.0;
  if (d.is_atomic()) return std::fabs(s.lo);
  r = std::max(r, std::fabs(d.tail_point(Side::Right, 0.5 * delta)));
  r = std::max(r, std::fabs(d.tail_point(Side::Left, 0.5 * delta)));
  return r;
}

inline double log_tail_ratio(const ParametricDistribution& q, const ParametricDistribution& p, double r) {
  double lq = log_tail_probability(q, r);
  if (lq == -kInf) return -kInf;
  double lp = log_tail_probability(p, r);
  if (lp == -kInf) return kInf;
  return lq - lp;
}

inline double support_radius(const ParametricDistribution& d) {
  Interval s = d.support();
  return std::max(std::fabs(s.lo), std::fabs(s.hi));
}

}  // namespace detail

/// Compares the tails of q against those of p in the sense of |x|.
///
/// Tail classes decide QHeavier/PHeavier for unbounded laws. Compact laws are
/// compared by support radius. Equal classes, and compact q inside the range
/// of p, give Comparable with c the sup of the tail-mass ratio over a grid of
/// radii reaching past 1e-100 residual mass.
inline TailVerdict tail_order_compare(const ParametricDistribution& p, const ParametricDistribution& q) {
  using R = TailVerdict::Relation;
  TailVerdict out;
  TailClass tq = q.abs_tail(), tp = p.abs_tail();
  int cmp = compare_heaviness(tq, tp);
  if (tq.is_compact() && tp.is_compact()) {
    double rq = detail::support_radius(q), rp = detail::support_radius(p);
    cmp = rq > rp ? 1 : 0;
  } else if (tq.is_compact()) {
    cmp = 0;  // ratio is eventually zero; report it as comparable with its grid bound
  }

  if (cmp > 0) {
    out.relation = R::QHeavier;
    out.c = kInf;
    const double target = std::log(kTailWitnessRatio);
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (double r = 0.0; r < 1e8; r = r == 0.0 ? 0.25 : r * 1.25) {
      if (detail::log_tail_ratio(q, p, r) > target) {
        hi = r;
        found = true;
        break;
      }
      lo = r;
    }
    if (found) {
      for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        double mid = 0.5 * (lo + hi);
        if (detail::log_tail_ratio(q, p, mid) > target) hi = mid; else lo = mid;
      }
      out.witness = hi;
    }
    return out;
  }

  out.relation = cmp < 0 ? R::PHeavier : R::Comparable;
  double horizon = std::max(detail::abs_radius(p, 1e-100), detail::abs_radius(q, 1e-100));
  if (tq.is_compact()) horizon = std::min(horizon, detail::support_radius(q));
  if (!std::isfinite(horizon) || horizon <= 0) horizon = 1.0;
  double best = 0.0;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    double r = horizon * i / n;
    double v = detail::log_tail_ratio(q, p, r);
    if (v > best) best = v;
  }
  out.c = std::max(1.0, std::exp(best));
  return out;
}

namespace detail {
/// Float slack when treating a computed sup ratio as exactly one.
inline constexpr double kParametricUnitSlack = 1e-12;

inline NoGrain unbounded_grain(const ParametricDistribution& p, const ParametricDistribution& q, const DensityRatio& dr) {
  NoGrain ng;
  ng.reason = NoGrain::Reason::UnboundedRatio;
  TailVerdict tv = tail_order_compare(p, q);
  if (tv.witness) ng.radius = tv.witness;
  ng.detail = "density ratio of " + q.describe() + " to " + p.describe() + " is unbounded";
  if (dr.unbounded_side) ng.detail += dr.unbounded_side == Side::Left ? " on the left tail" : " on the right tail";
  return ng;
}
}  // namespace detail

/// Decides whether p contains a grain of q via the density-ratio bound.
/// A finite sup c gives the maximal certificate epsilon = 1/c with the
/// residual kept in symbolic form.
inline GrainResult<double> contains_grain_parametric(const ParametricDistribution& p, const ParametricDistribution& q) {
  if (q.is_atomic() || p.is_atomic()) {
    if (q == p) return GrainCertificate<double>{1.0, 1.0, ArbitraryResidual{}};
    NoGrain ng;
    ng.reason = NoGrain::Reason::SupportViolation;
    if (q.is_atomic()) {
      ng.witness_point = q.support().lo;
      ng.detail = "point mass at " + format_short(q.support().lo) + " has zero probability under " + p.describe();
    } else {
      ng.witness_point = p.support().lo;
      ng.detail = q.describe() + " is not absolutely continuous with respect to the point mass " + p.describe();
    }
    return ng;
  }
  DensityRatio dr = analyze_density_ratio(q, p);
  if (dr.status == RatioStatus::SupportViolation) {
    NoGrain ng;
    ng.reason = NoGrain::Reason::SupportViolation;
    ng.witness_point = dr.violation_point;
    ng.detail = q.describe() + " puts mass outside the support of " + p.describe();
    return ng;
  }
  if (dr.status == RatioStatus::UnboundedTail) return detail::unbounded_grain(p, q, dr);
  double c = dr.sup;
  if (c <= 1.0 + detail::kParametricUnitSlack) return GrainCertificate<double>{1.0, 1.0, ArbitraryResidual{}};
  double eps = 1.0 / c;
  return GrainCertificate<double>{eps, c, SymbolicResidual{p, q, eps}};
}

namespace detail {

/// Grid covering all but 1e-12 of the mass of both laws, with points placed
/// on either side of every breakpoint.
inline std::vector<double> verification_grid(const ParametricDistribution& p, const ParametricDistribution& q,
                                             int points = kGridPoints) {
  auto window = [](const ParametricDistribution& d) {
    return std::pair{d.tail_point(Side::Left, 0.5 * kGridTailMass), d.tail_point(Side::Right, 0.5 * kGridTailMass)};
  };
  auto [pl, ph] = window(p);
  auto [ql, qh] = window(q);
  double lo = std::min(pl, ql), hi = std::max(ph, qh);
  std::vector<double> xs;
  xs.reserve(points + 64);
  for (int i = 0; i < points; ++i) xs.push_back(lo + (hi - lo) * i / (points - 1));
  std::vector<double> bps = p.breakpoints();
  auto qb = q.breakpoints();
  bps.insert(bps.end(), qb.begin(), qb.end());
  for (double b : bps) {
    if (!std::isfinite(b)) continue;
    double h = 1e-9 * (1.0 + std::fabs(b));
    for (double x : {b - h, b, b + h})
      if (x >= lo && x <= hi) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

/// Composite Simpson integral of f over [lo, hi], split at the breakpoints so
/// that jumps of truncated densities fall on segment ends.
template <class F>
double piecewise_simpson(F&& f, double lo, double hi, std::vector<double> cuts, int per_segment = 2000) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = std::max(cuts[k], lo), b = std::min(cuts[k + 1], hi);
    if (!(b > a)) continue;
    // Nudge inside the segment so one-sided limits are used at jumps.
    double nudge = 1e-12 * (1.0 + std::max(std::fabs(a), std::fabs(b)));
    double a2 = a + nudge, b2 = b - nudge;
    if (!(b2 > a2)) continue;
    int n = per_segment;
    double h = (b2 - a2) / n;
    double s = f(a2) + f(b2);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a2 + i * h);
    total += s * h / 3.0;
  }
  return total;
}

}  // namespace detail

/// Verifies a parametric certificate on a 10^4-point grid: the mixture
/// identity to 1e-6, nonnegativity of the residual density, and unit
/// residual mass to 1e-6. Never throws for a malformed certificate.
inline CertificateReport verify_certificate(const ParametricDistribution& p, const ParametricDistribution& q,
                                            const GrainCertificate<double>& cert) {
  CertificateReport rep;
  constexpr double kIdentityTol = 1e-6;
  constexpr double kMassTol = 1e-6;
  constexpr double kNegSlack = 1e-9;
  if (!(cert.epsilon > 0) || !(cert.epsilon <= 1.0)) {
    rep.epsilon_in_range = false;
    rep.failures.push_back("epsilon outside (0,1]");
    return rep;
  }
  if (std::fabs(cert.epsilon * cert.c - 1.0) > kFloatTolerance) {
    rep.reciprocal_ok = false;
    rep.failures.push_back("epsilon * c != 1");
  }
  if (p.is_atomic() || q.is_atomic()) {
    bool same = p == q;
    if (!same || cert.epsilon != 1.0) {
      rep.identity_ok = false;
      rep.failures.push_back("atomic laws admit only the identical-law certificate");
    }
    return rep;
  }
  const double eps = cert.epsilon;
  auto xs = detail::verification_grid(p, q);
  std::vector<double> cuts = p.breakpoints();
  auto qb = q.breakpoints();
  cuts.insert(cuts.end(), qb.begin(), qb.end());
  double lo = xs.front(), hi = xs.back();

  // The residual implied by the identity must be a nonnegative density.
  if (eps < 1.0) {
    for (double x : xs) {
      double pp = p.pdf(x), eq = eps * q.pdf(x);
      if (pp - eq < -kNegSlack * std::max(pp, eq)) {
        rep.residual_nonnegative = false;
        rep.failures.push_back("implied residual density negative at x = " + format_short(x));
        break;
      }
    }
  }

  auto check_identity = [&](auto&& residual_pdf) {
    for (double x : xs) {
      double mixed = eps * q.pdf(x) + (1.0 - eps) * residual_pdf(x);
      double err = std::fabs(p.pdf(x) - mixed);
      rep.max_identity_error = std::max(rep.max_identity_error, err);
    }
    if (rep.max_identity_error > kIdentityTol) {
      rep.identity_ok = false;
      rep.failures.push_back("mixture identity error " + format_short(rep.max_identity_error) + " exceeds 1e-6");
    }
  };

  std::visit(
      [&](const auto& res) {
        using Rz = std::decay_t<decltype(res)>;
        if constexpr (std::is_same_v<Rz, ArbitraryResidual>) {
          if (eps != 1.0) {
            rep.identity_ok = false;
            rep.failures.push_back("arbitrary residual requires epsilon = 1");
          }
          check_identity([](double) { return 0.0; });
        } else if constexpr (std::is_same_v<Rz, SymbolicResidual>) {
          if (!(res.p == p) || !(res.q == q) || std::fabs(res.epsilon - eps) > 0.0) {
            rep.identity_ok = false;
            rep.failures.push_back("symbolic residual refers to different laws or epsilon");
            return;
          }
          if (eps < 1.0) {
            check_identity([&](double x) { return res.pdf(x); });
            double mass = detail::piecewise_simpson([&](double x) { return std::max(0.0, res.pdf(x)); }, lo, hi, cuts);
            if (std::fabs(mass - 1.0) > kMassTol) {
              rep.residual_mass_ok = false;
              rep.failures.push_back("residual mass " + format_short(mass) + " differs from 1");
            }
          }
        } else if constexpr (std::is_same_v<Rz, ParametricDistribution>) {
          if (res.is_atomic()) {
            rep.identity_ok = false;
            rep.failures.push_back("atomic residual against non-atomic prior");
            return;
          }
          check_identity([&](double x) { return res.pdf(x); });
        } else {
          rep.identity_ok = false;
          rep.failures.push_back("finite residual supplied for parametric laws");
        }
      },
      cert.residual);
  return rep;
}

/// Certificate for a smaller epsilon: same laws, recomputed residual.
inline GrainCertificate<double> certificate_with_epsilon(const ParametricDistribution& p, const ParametricDistribution& q,
                                                         double eps) {
  if (!(eps > 0) || eps > 1.0) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1]");
  if (eps == 1.0) return {1.0, 1.0, ArbitraryResidual{}};
  return {eps, 1.0 / eps, SymbolicResidual{p, q, eps}};
}

}  // namespace mispec
