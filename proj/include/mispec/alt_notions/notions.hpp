#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mispec/alt_notions/simplex.hpp"
#include "mispec/core/error.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/rationalizer/finite_check.hpp"

namespace mispec {

/// Reweighting of the realized posteriors with strictly positive weights
/// whose barycenter is the prior.
template <class T>
struct SYCertificate {
  std::vector<T> lambda;
  /// Optimal minimum weight of the max-min program.
  T delta;
};

struct SYInfeasible {
  /// Set when the prior is in the hull but on its relative boundary.
  std::optional<double> delta_star;
  std::string reason;
};

template <class T>
using SYResult = std::variant<SYCertificate<T>, SYInfeasible>;

template <class T>
bool sy_feasible(const SYResult<T>& r) {
  return std::holds_alternative<SYCertificate<T>>(r);
}

struct NotionLadder {
  bool bayes_plausible = false;
  bool shmaya_yariv = false;
  bool misspecified_bayesian = false;
};

inline bool operator==(const NotionLadder& a, const NotionLadder& b) {
  return a.bayes_plausible == b.bayes_plausible && a.shmaya_yariv == b.shmaya_yariv &&
         a.misspecified_bayesian == b.misspecified_bayesian;
}

namespace detail {
template <class T>
void require_finite_ensemble(const FiniteDistribution<T>& prior, const FiniteEnsemble<T>& ens) {
  if (!ens.is_finite()) throw Error(ErrorCode::MixedRepresentation, "ensemble posteriors are parametric");
  for (std::size_t i = 0; i < ens.size(); ++i) require_same_states(prior, ens.finite_posterior(i));
}
}  // namespace detail

/// Whether the prior equals the average posterior.
template <class T>
bool bayes_plausibility_test(const FiniteDistribution<T>& prior, const FiniteEnsemble<T>& ens) {
  detail::require_finite_ensemble(prior, ens);
  auto avg = average_finite_posterior(ens);
  for (std::size_t x = 0; x < prior.size(); ++x)
    if (!nearly_equal(prior[x], avg[x])) return false;
  return true;
}

/// Solves max delta s.t. lambda_j >= delta, sum lambda = 1, sum lambda_j mu_j = prior.
///
/// Substituting lambda_j = delta + t_j with t_j >= 0 gives a standard-form
/// program in (delta, t) with delta >= 0; the prior lies outside the hull
/// exactly when that program is infeasible.
template <class T>
SYResult<T> shmaya_yariv_test(const FiniteDistribution<T>& prior, const FiniteEnsemble<T>& ens) {
  detail::require_finite_ensemble(prior, ens);
  const std::size_t n = ens.size(), d = prior.size();
  const T zero = ScalarTraits<T>::zero(), one = ScalarTraits<T>::one();
  std::vector<T> c(n + 1, zero);
  c[0] = one;
  std::vector<std::vector<T>> A;
  std::vector<T> b;
  std::vector<T> sum_row(n + 1, one);
  sum_row[0] = T(static_cast<long>(n));
  A.push_back(std::move(sum_row));
  b.push_back(one);
  for (std::size_t x = 0; x < d; ++x) {
    std::vector<T> row(n + 1, zero);
    for (std::size_t j = 0; j < n; ++j) {
      const T& mu = ens.finite_posterior(j)[x];
      row[0] += mu;
      row[j + 1] = mu;
    }
    A.push_back(std::move(row));
    b.push_back(prior[x]);
  }
  auto res = lp::maximize(c, A, b);
  if (res.status == lp::Status::Infeasible)
    return SYInfeasible{std::nullopt, "prior lies outside the convex hull of the posteriors"};
  if (res.status != lp::Status::Optimal)
    throw Error(ErrorCode::Internal, "max-min weight program is unbounded");
  T delta = res.x[0];
  bool positive;
  if constexpr (is_exact_v<T>) {
    positive = delta > 0;
  } else {
    positive = delta > kFloatTolerance;
  }
  if (!positive)
    return SYInfeasible{to_double(delta), "prior lies on the relative boundary of the convex hull of the posteriors"};
  SYCertificate<T> cert;
  cert.delta = delta;
  for (std::size_t j = 0; j < n; ++j) {
    T l = delta + res.x[j + 1];
    cert.lambda.push_back(l);
  }
  return cert;
}

/// Checks positivity, unit mass and the barycenter identity of a certificate.
template <class T>
bool verify_sy_certificate(const FiniteDistribution<T>& prior, const FiniteEnsemble<T>& ens, const SYCertificate<T>& cert) {
  if (cert.lambda.size() != ens.size()) return false;
  T total = ScalarTraits<T>::zero();
  for (const auto& l : cert.lambda) {
    if (!(l > 0)) return false;
    total += l;
  }
  if (!nearly_equal(total, ScalarTraits<T>::one())) return false;
  for (std::size_t x = 0; x < prior.size(); ++x) {
    T bary = ScalarTraits<T>::zero();
    for (std::size_t j = 0; j < ens.size(); ++j) bary += cert.lambda[j] * ens.finite_posterior(j)[x];
    if (!nearly_equal(bary, prior[x])) return false;
  }
  return true;
}

/// Runs the three tests and enforces the implication chain.
template <class T>
NotionLadder classify(const FiniteDistribution<T>& prior, const FiniteEnsemble<T>& ens) {
  detail::require_finite_ensemble(prior, ens);
  NotionLadder l;
  l.bayes_plausible = bayes_plausibility_test(prior, ens);
  auto sy = shmaya_yariv_test(prior, ens);
  l.shmaya_yariv = sy_feasible(sy);
  if (l.shmaya_yariv && !verify_sy_certificate(prior, ens, std::get<SYCertificate<T>>(sy)))
    throw Error(ErrorCode::LadderViolation, "Shmaya-Yariv certificate fails its own identities");
  l.misspecified_bayesian = is_consistent(check_finite_support(prior, ens));
  if (l.bayes_plausible && !l.shmaya_yariv)
    throw Error(ErrorCode::LadderViolation, "Bayes plausible but Shmaya-Yariv infeasible");
  if (l.shmaya_yariv && !l.misspecified_bayesian)
    throw Error(ErrorCode::LadderViolation, "Shmaya-Yariv feasible but not misspecified Bayesian");
  return l;
}

}  // namespace mispec
