#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/core/scalar.hpp"

namespace mispec {

/// Probability vector over an ordered list of labeled states.
///
/// Construction validates: one non-negative probability per distinct label,
/// total mass 1 (exactly for rationals, within kFloatTolerance for doubles).
template <class T>
class FiniteDistribution {
 public:
  using value_type = T;

  FiniteDistribution(std::vector<std::string> states, std::vector<T> probs)
      : states_(std::move(states)), probs_(std::move(probs)) {
    validate();
  }

  /// Builds from raw masses, clamping float round-off below zero and
  /// rescaling by the total. Intended for derived quantities only.
  static FiniteDistribution normalized(std::vector<std::string> states, std::vector<T> masses) {
    T total = ScalarTraits<T>::zero();
    for (auto& m : masses) {
      if constexpr (!is_exact_v<T>) {
        if (m < 0 && m > -1e-12) m = 0;
      }
      total += m;
    }
    if (!(total > 0)) throw Error(ErrorCode::ValidationError, "distribution has no mass");
    for (auto& m : masses) m /= total;
    return FiniteDistribution(std::move(states), std::move(masses));
  }

  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<T>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  const T& operator[](std::size_t i) const { return probs_[i]; }

  std::optional<std::size_t> index_of(const std::string& label) const {
    for (std::size_t i = 0; i < states_.size(); ++i)
      if (states_[i] == label) return i;
    return std::nullopt;
  }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < probs_.size(); ++i)
      if (probs_[i] > 0) out.push_back(i);
    return out;
  }

  bool same_states(const FiniteDistribution& other) const { return states_ == other.states_; }

  /// Element-wise comparison within `tol` (exact when tol is zero).
  bool approx_equal(const FiniteDistribution& other, const T& tol) const {
    if (!same_states(other)) return false;
    for (std::size_t i = 0; i < probs_.size(); ++i)
      if (!nearly_equal(probs_[i], other.probs_[i], tol)) return false;
    return true;
  }

  bool approx_equal(const FiniteDistribution& other) const {
    return approx_equal(other, ScalarTraits<T>::tolerance());
  }

  friend bool operator==(const FiniteDistribution& a, const FiniteDistribution& b) {
    return a.states_ == b.states_ && a.probs_ == b.probs_;
  }

  template <class U>
  FiniteDistribution<U> cast() const {
    std::vector<U> out;
    out.reserve(probs_.size());
    for (const auto& p : probs_) {
      if constexpr (std::is_same_v<U, T>) {
        out.push_back(p);
      } else if constexpr (is_exact_v<U>) {
        out.push_back(rational_from_double(to_double(p)));
      } else {
        out.push_back(to_double(p));
      }
    }
    if constexpr (is_exact_v<U> && !is_exact_v<T>) {
      return FiniteDistribution<U>::normalized(states_, std::move(out));
    } else {
      return FiniteDistribution<U>(states_, std::move(out));
    }
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (i) s += ",";
      s += format_scalar(probs_[i]);
    }
    return s + ")";
  }

 private:
  void validate() const {
    if (states_.empty()) throw Error(ErrorCode::ValidationError, "empty state list");
    if (states_.size() != probs_.size())
      throw Error(ErrorCode::ValidationError, "state/probability length mismatch");
    std::set<std::string> seen(states_.begin(), states_.end());
    if (seen.size() != states_.size()) throw Error(ErrorCode::ValidationError, "duplicate state label");
    T total = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] < 0) {
        throw Error(ErrorCode::ValidationError,
                    "negative probability " + format_scalar(probs_[i]) + " at state " + states_[i]);
      }
      if constexpr (!is_exact_v<T>) {
        if (!std::isfinite(probs_[i])) throw Error(ErrorCode::ValidationError, "non-finite probability");
      }
      total += probs_[i];
    }
    if (!nearly_equal(total, ScalarTraits<T>::one()))
      throw Error(ErrorCode::ValidationError, "probabilities sum to " + format_scalar(T(total)) + ", not 1");
  }

  std::vector<std::string> states_;
  std::vector<T> probs_;
};

/// Default labels x1..xn.
inline std::vector<std::string> default_state_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::to_string(i + 1));
  return out;
}

template <class T>
void require_same_states(const FiniteDistribution<T>& a, const FiniteDistribution<T>& b) {
  if (!a.same_states(b)) throw Error(ErrorCode::StateMismatch, "distributions are over different state lists");
}

}  // namespace mispec
