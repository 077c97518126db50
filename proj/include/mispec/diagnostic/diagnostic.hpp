#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/grain/parametric.hpp"
#include "mispec/measures/parametric.hpp"

namespace mispec {

struct GaussianPrior {
  double mean = 0.0;
  double variance = 1.0;
};

struct SignalNoise {
  double variance = 1.0;
};

enum class Centering { Literal, Centered };

inline std::string to_string(Centering c) { return c == Centering::Literal ? "literal" : "centered"; }

/// Subjective law of the noise: eps | x ~ N(slope (x - c), noise_variance)
/// with c = 0 (Literal) or c = prior_mean (Centered).
struct MisspecifiedSignalModel {
  double slope = 0.0;
  double noise_variance = 1.0;
  Centering centering = Centering::Centered;
};

namespace detail {
inline void require_positive_variance(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) throw Error(ErrorCode::NonpositiveVariance, std::string(what) + " must be positive");
}
inline void require_theta(double theta) {
  if (!(theta >= 0) || !std::isfinite(theta)) throw Error(ErrorCode::NegativeTheta, "theta must be a nonnegative number");
}
}  // namespace detail

inline double kalman_gain(double prior_variance, double noise_variance) {
  detail::require_positive_variance(prior_variance, "prior variance");
  detail::require_positive_variance(noise_variance, "noise variance");
  return prior_variance / (prior_variance + noise_variance);
}

inline GaussianPrior correct_posterior(const GaussianPrior& prior, const SignalNoise& noise, double s) {
  double k = kalman_gain(prior.variance, noise.variance);
  return {prior.mean + k * (s - prior.mean), (1 - k) * prior.variance};
}

inline GaussianPrior diagnostic_posterior(const GaussianPrior& prior, const SignalNoise& noise, double s, double theta) {
  detail::require_theta(theta);
  double k = kalman_gain(prior.variance, noise.variance);
  return {prior.mean + (1 + theta) * k * (s - prior.mean), (1 - k) * prior.variance};
}

inline MisspecifiedSignalModel misspecified_model(double theta, const SignalNoise& noise,
                                                  Centering centering = Centering::Centered) {
  detail::require_theta(theta);
  detail::require_positive_variance(noise.variance, "noise variance");
  return {-theta / (1 + theta), noise.variance / ((1 + theta) * (1 + theta)), centering};
}

/// Posterior of x given s when x ~ prior and s = x + eps under the subjective
/// noise law, by conditioning the joint normal of (x, s).
inline GaussianPrior misspecified_posterior(const GaussianPrior& prior, const MisspecifiedSignalModel& model, double s) {
  detail::require_positive_variance(prior.variance, "prior variance");
  detail::require_positive_variance(model.noise_variance, "noise variance");
  double center = model.centering == Centering::Centered ? prior.mean : 0.0;
  double b = 1 + model.slope;  // s = b x - slope center + eta
  double mean_s = b * prior.mean - model.slope * center;
  double var_s = b * b * prior.variance + model.noise_variance;
  double cov = b * prior.variance;
  double mean = prior.mean + cov / var_s * (s - mean_s);
  double var = prior.variance - cov * cov / var_s;
  return {mean, var};
}

/// Posterior moments in exact rational arithmetic.
struct ExactGaussian {
  Rational mean;
  Rational variance;
};

/// The misspecified-model posterior computed exactly from the shortest decimal
/// forms of the inputs, with the subjective slope and variance formed from theta.
inline ExactGaussian misspecified_posterior_exact(const GaussianPrior& prior, const SignalNoise& noise, double theta,
                                                  Centering centering, double s) {
  detail::require_positive_variance(prior.variance, "prior variance");
  detail::require_positive_variance(noise.variance, "noise variance");
  detail::require_theta(theta);
  Rational xbar = rational_from_double(prior.mean), s2 = rational_from_double(prior.variance);
  Rational e2 = rational_from_double(noise.variance), th = rational_from_double(theta);
  Rational sig = rational_from_double(s);
  Rational one(1);
  Rational slope = -th / (one + th);
  Rational nv = e2 / ((one + th) * (one + th));
  Rational center = centering == Centering::Centered ? xbar : Rational(0);
  Rational b = one + slope;
  Rational mean_s = b * xbar - slope * center;
  Rational var_s = b * b * s2 + nv;
  Rational cov = b * s2;
  Rational mean = xbar + cov / var_s * (sig - mean_s);
  Rational var = s2 - cov * cov / var_s;
  return {mean, var};
}

/// (1 - K) sigma^2 and the diagnostic mean, exactly.
inline ExactGaussian diagnostic_posterior_exact(const GaussianPrior& prior, const SignalNoise& noise, double theta,
                                                double s) {
  detail::require_theta(theta);
  Rational xbar = rational_from_double(prior.mean), s2 = rational_from_double(prior.variance);
  Rational e2 = rational_from_double(noise.variance), th = rational_from_double(theta);
  Rational k = s2 / (s2 + e2);
  Rational one(1);
  Rational mean = xbar + (one + th) * k * (rational_from_double(s) - xbar);
  Rational var = (one - k) * s2;
  return {mean, var};
}

struct EquivalenceReport {
  double max_mean_deviation = 0.0;
  double max_variance_deviation = 0.0;
  /// Largest |variance - (1-K) sigma^2| over both posteriors.
  double max_variance_vs_closed_form = 0.0;
  double worst_signal = 0.0;
  std::size_t signals = 0;
  /// Exact-arithmetic check that both posteriors have variance (1-K) sigma^2.
  bool variance_identity_exact = true;
  /// Exact-arithmetic check that the two posterior means coincide.
  bool mean_identity_exact = true;
};

inline std::vector<double> signal_grid(double lo, double hi, double step) {
  if (!(step > 0) || !(hi >= lo)) throw Error(ErrorCode::InvalidArgument, "signal grid needs lo <= hi and step > 0");
  std::vector<double> g;
  auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

/// Worst-case deviation between the misspecified-model posterior and the
/// diagnostic posterior over a grid of signals.
inline EquivalenceReport equivalence_report(const GaussianPrior& prior, const SignalNoise& noise, double theta,
                                            Centering centering, const std::vector<double>& signals) {
  auto model = misspecified_model(theta, noise, centering);
  double k = kalman_gain(prior.variance, noise.variance);
  double closed = (1 - k) * prior.variance;
  EquivalenceReport rep;
  rep.signals = signals.size();
  for (double s : signals) {
    auto d = diagnostic_posterior(prior, noise, s, theta);
    auto m = misspecified_posterior(prior, model, s);
    double dm = std::fabs(d.mean - m.mean);
    if (dm > rep.max_mean_deviation) {
      rep.max_mean_deviation = dm;
      rep.worst_signal = s;
    }
    rep.max_variance_deviation = std::max(rep.max_variance_deviation, std::fabs(d.variance - m.variance));
    rep.max_variance_vs_closed_form =
        std::max({rep.max_variance_vs_closed_form, std::fabs(d.variance - closed), std::fabs(m.variance - closed)});
    auto de = diagnostic_posterior_exact(prior, noise, theta, s);
    auto me = misspecified_posterior_exact(prior, noise, theta, centering, s);
    rep.variance_identity_exact = rep.variance_identity_exact && de.variance == me.variance;
    rep.mean_identity_exact = rep.mean_identity_exact && de.mean == me.mean;
  }
  return rep;
}

/// Law of the diagnostic posterior mean when signals follow the true model.
inline ParametricDistribution diagnostic_mean_law(const GaussianPrior& prior, const SignalNoise& noise, double theta) {
  detail::require_theta(theta);
  double k = kalman_gain(prior.variance, noise.variance);
  double a = (1 + theta) * k;
  return ParametricDistribution::normal(prior.mean, a * a * (prior.variance + noise.variance));
}

/// Average diagnostic posterior under the true signal law: a normal whose
/// variance adds the fixed posterior variance to the spread of the means.
inline ParametricDistribution average_diagnostic_posterior(const GaussianPrior& prior, const SignalNoise& noise,
                                                           double theta) {
  detail::require_theta(theta);
  double k = kalman_gain(prior.variance, noise.variance);
  double a = (1 + theta) * k;
  return ParametricDistribution::normal(prior.mean, a * a * (prior.variance + noise.variance) + (1 - k) * prior.variance);
}

/// Grain status of the diagnostic belief sequence.
///
/// The single-cell form compares the prior with the average posterior, whose
/// variance is sigma^2 (1 + K ((1+theta)^2 - 1)) and so exceeds the prior
/// variance once theta > 0. The partition form groups posteriors by mean into
/// bounded cells; each cell average then has Gaussian tails of variance
/// (1-K) sigma^2, lighter than the prior's.
struct DiagnosticGrainReport {
  double prior_variance = 0.0;
  double average_variance = 0.0;
  bool average_has_grain = false;
  std::string average_detail;
  double cell_variance = 0.0;
  bool cells_have_grain = false;
};

inline DiagnosticGrainReport diagnostic_grain_report(const GaussianPrior& prior, const SignalNoise& noise, double theta) {
  DiagnosticGrainReport rep;
  auto p = ParametricDistribution::normal(prior.mean, prior.variance);
  auto avg = average_diagnostic_posterior(prior, noise, theta);
  rep.prior_variance = prior.variance;
  rep.average_variance = std::get<Normal>(avg.variant()).variance;
  auto r = contains_grain_parametric(p, avg);
  rep.average_has_grain = std::holds_alternative<GrainCertificate<double>>(r);
  rep.average_detail = rep.average_has_grain ? "c = " + format_short(std::get<GrainCertificate<double>>(r).c)
                                             : std::get<NoGrain>(r).detail;
  double k = kalman_gain(prior.variance, noise.variance);
  rep.cell_variance = (1 - k) * prior.variance;
  // A cell whose means lie in a bounded interval has the tail of N(., (1-K) sigma^2).
  auto cell_tail = ParametricDistribution::normal(prior.mean, rep.cell_variance).abs_tail();
  rep.cells_have_grain = compare_heaviness(cell_tail, p.abs_tail()) < 0;
  return rep;
}

}  // namespace mispec
