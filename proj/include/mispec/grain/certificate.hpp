#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mispec/core/scalar.hpp"
#include "mispec/measures/finite_distribution.hpp"
#include "mispec/measures/parametric.hpp"

namespace mispec {

/// Residual left unspecified: only valid with epsilon = 1, where P = Q.
struct ArbitraryResidual {
  friend bool operator==(const ArbitraryResidual&, const ArbitraryResidual&) = default;
};

/// Residual given by its density formula (p - epsilon q) / (1 - epsilon).
struct SymbolicResidual {
  ParametricDistribution p;
  ParametricDistribution q;
  double epsilon;

  double pdf(double x) const { return (p.pdf(x) - epsilon * q.pdf(x)) / (1.0 - epsilon); }
  std::string describe() const {
    return "(" + p.describe() + " - " + format_short(epsilon) + "*" + q.describe() + ")/(1-" + format_short(epsilon) + ")";
  }
};

template <class T>
using Residual = std::variant<ArbitraryResidual, FiniteDistribution<T>, ParametricDistribution, SymbolicResidual>;

/// Witness that P = epsilon Q + (1 - epsilon) Q', with c = 1/epsilon bounding dQ/dP.
template <class T>
struct GrainCertificate {
  T epsilon;
  T c;
  Residual<T> residual;

  bool arbitrary_residual() const { return std::holds_alternative<ArbitraryResidual>(residual); }
};

/// Why the grain relation fails.
struct NoGrain {
  enum class Reason { SupportViolation, UnboundedRatio };
  Reason reason = Reason::SupportViolation;
  std::optional<std::size_t> witness_index;  // finite: a state with q > 0 = p
  std::optional<std::string> witness_state;
  std::optional<double> witness_point;  // parametric: a point outside supp(p)
  std::optional<double> radius;         // parametric: where dq/dp first exceeds 1e6
  std::string detail;
};

inline std::string to_string(NoGrain::Reason r) {
  return r == NoGrain::Reason::SupportViolation ? "SupportViolation" : "UnboundedRatio";
}

template <class T>
using GrainResult = std::variant<GrainCertificate<T>, NoGrain>;

template <class T>
bool has_grain(const GrainResult<T>& r) {
  return std::holds_alternative<GrainCertificate<T>>(r);
}

/// Pass/fail report of a certificate check. Never throws on a bad certificate.
struct CertificateReport {
  bool epsilon_in_range = true;
  bool reciprocal_ok = true;
  bool identity_ok = true;
  bool residual_nonnegative = true;
  bool residual_mass_ok = true;
  double max_identity_error = 0.0;
  std::vector<std::string> failures;

  bool ok() const {
    return epsilon_in_range && reciprocal_ok && identity_ok && residual_nonnegative && residual_mass_ok;
  }
};

}  // namespace mispec
