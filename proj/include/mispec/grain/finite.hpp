#pragma once

#include <optional>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/core/scalar.hpp"
#include "mispec/grain/certificate.hpp"
#include "mispec/measures/finite_distribution.hpp"

namespace mispec {

namespace detail {
/// Float-mode slack when deciding that c = 1 (i.e. q == p).
inline constexpr double kUnitRatioSlack = 1e-12;
}  // namespace detail

/// Builds the certificate for a given epsilon, computing the residual
/// (p - eps q)/(1 - eps). The residual may fail validation when eps exceeds
/// the maximal admissible value; callers wanting a report should use
/// verify_certificate on an explicit residual instead.
template <class T>
GrainCertificate<T> certificate_with_epsilon(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q, const T& eps) {
  require_same_states(p, q);
  if (!(eps > 0) || eps > 1) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1]");
  T c = ScalarTraits<T>::one() / eps;
  if (eps == 1) return {eps, c, ArbitraryResidual{}};
  std::vector<T> r;
  T denom = ScalarTraits<T>::one() - eps;
  for (std::size_t i = 0; i < p.size(); ++i) r.push_back((p[i] - eps * q[i]) / denom);
  if constexpr (is_exact_v<T>) {
    return {eps, c, FiniteDistribution<T>(p.states(), std::move(r))};
  } else {
    return {eps, c, FiniteDistribution<T>::normalized(p.states(), std::move(r))};
  }
}

/// Decides whether p contains a grain of q and returns the maximal-epsilon
/// certificate: c = max over supp(p) of q/p, epsilon = 1/c.
template <class T>
GrainResult<T> grain_decompose_finite(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
  require_same_states(p, q);
  T c = ScalarTraits<T>::zero();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) {
      T ratio = q[i] / p[i];
      if (ratio > c) c = ratio;
    } else if (q[i] > 0) {
      NoGrain ng;
      ng.reason = NoGrain::Reason::SupportViolation;
      ng.witness_index = i;
      ng.witness_state = p.states()[i];
      ng.detail = "q puts mass " + format_scalar(q[i]) + " on state " + p.states()[i] + " where p has none";
      return ng;
    }
  }
  bool unit;
  if constexpr (is_exact_v<T>) {
    unit = c <= 1;
  } else {
    unit = c <= 1.0 + detail::kUnitRatioSlack;
  }
  if (unit) return GrainCertificate<T>{ScalarTraits<T>::one(), ScalarTraits<T>::one(), ArbitraryResidual{}};
  T eps = ScalarTraits<T>::one() / c;
  std::vector<T> r;
  T denom = ScalarTraits<T>::one() - eps;
  for (std::size_t i = 0; i < p.size(); ++i) {
    T v = (p[i] - eps * q[i]) / denom;
    if constexpr (!is_exact_v<T>) {
      if (v < 0) v = 0;  // binding state, round-off only
    }
    r.push_back(v);
  }
  if constexpr (is_exact_v<T>) {
    return GrainCertificate<T>{eps, c, FiniteDistribution<T>(p.states(), std::move(r))};
  } else {
    return GrainCertificate<T>{eps, c, FiniteDistribution<T>::normalized(p.states(), std::move(r))};
  }
}

/// Checks P = eps Q + (1 - eps) Q' state by state, plus the validity of the
/// residual implied by (p, q, eps).
template <class T>
CertificateReport verify_certificate(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q,
                                     const GrainCertificate<T>& cert) {
  CertificateReport rep;
  const T tol = ScalarTraits<T>::tolerance();
  const T one = ScalarTraits<T>::one();
  if (!p.same_states(q)) {
    rep.identity_ok = false;
    rep.failures.push_back("state lists differ");
    return rep;
  }
  if (!(cert.epsilon > 0) || cert.epsilon > one) {
    rep.epsilon_in_range = false;
    rep.failures.push_back("epsilon outside (0,1]");
    return rep;
  }
  if (!nearly_equal(T(cert.epsilon * cert.c), one, tol)) {
    rep.reciprocal_ok = false;
    rep.failures.push_back("epsilon * c != 1");
  }
  // Residual implied by the mixture identity.
  if (cert.epsilon < one) {
    T denom = one - cert.epsilon;
    T mass = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < p.size(); ++i) {
      T implied = (p[i] - cert.epsilon * q[i]) / denom;
      mass += implied;
      if (implied < -tol) {
        rep.residual_nonnegative = false;
        rep.failures.push_back("negative implied residual mass " + format_scalar(T(implied)) + " at state " + p.states()[i]);
      }
    }
    if (!nearly_equal(mass, one, tol)) {
      rep.residual_mass_ok = false;
      rep.failures.push_back("implied residual mass != 1");
    }
  }
  std::visit(
      [&](const auto& res) {
        using R = std::decay_t<decltype(res)>;
        if constexpr (std::is_same_v<R, ArbitraryResidual>) {
          if (cert.epsilon != one) {
            rep.identity_ok = false;
            rep.failures.push_back("arbitrary residual requires epsilon = 1");
          }
          for (std::size_t i = 0; i < p.size(); ++i) {
            double err = std::fabs(to_double(p[i]) - to_double(q[i]));
            rep.max_identity_error = std::max(rep.max_identity_error, err);
            if (!nearly_equal(p[i], q[i], tol)) {
              rep.identity_ok = false;
              rep.failures.push_back("epsilon = 1 requires p == q; differs at " + p.states()[i]);
              break;
            }
          }
        } else if constexpr (std::is_same_v<R, FiniteDistribution<T>>) {
          if (!res.same_states(p)) {
            rep.identity_ok = false;
            rep.failures.push_back("residual over different states");
            return;
          }
          for (std::size_t i = 0; i < p.size(); ++i) {
            T mixed = cert.epsilon * q[i] + (one - cert.epsilon) * res[i];
            rep.max_identity_error = std::max(rep.max_identity_error, std::fabs(to_double(T(p[i] - mixed))));
            if (!nearly_equal(p[i], mixed, tol)) {
              rep.identity_ok = false;
              rep.failures.push_back("mixture identity fails at state " + p.states()[i]);
            }
          }
        } else {
          rep.identity_ok = false;
          rep.failures.push_back("parametric residual supplied for finite distributions");
        }
      },
      cert.residual);
  return rep;
}

}  // namespace mispec
