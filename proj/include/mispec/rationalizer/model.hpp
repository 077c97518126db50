#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/core/scalar.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/measures/finite_distribution.hpp"

namespace mispec {

/// Reserved label of the signal that carries subjective mass only.
inline const std::string kOminus = "\xE2\x8A\x96";  // U+2296

/// Subjective joint law over states x signals.
///
/// The signal list always contains kOminus (appended as an all-zero column
/// when absent). The conditional kernel nu(s, .) is the column of s divided
/// by its total and is defined only where that total is positive.
template <class T>
class SubjectiveModel {
 public:
  SubjectiveModel(std::vector<std::string> states, std::vector<std::string> signals, std::vector<std::vector<T>> joint)
      : states_(std::move(states)), signals_(std::move(signals)), joint_(std::move(joint)) {
    if (states_.empty()) throw Error(ErrorCode::ValidationError, "model has no states", "model.states");
    if (joint_.size() != states_.size())
      throw Error(ErrorCode::ValidationError, "joint table needs one row per state", "model.joint");
    bool has_ominus = false;
    for (const auto& s : signals_) has_ominus = has_ominus || s == kOminus;
    for (const auto& row : joint_)
      if (row.size() != signals_.size())
        throw Error(ErrorCode::ValidationError, "joint table needs one column per signal", "model.joint");
    if (!has_ominus) {
      signals_.push_back(kOminus);
      for (auto& row : joint_) row.push_back(ScalarTraits<T>::zero());
    }
    if (std::set<std::string>(states_.begin(), states_.end()).size() != states_.size())
      throw Error(ErrorCode::ValidationError, "duplicate state label", "model.states");
    if (std::set<std::string>(signals_.begin(), signals_.end()).size() != signals_.size())
      throw Error(ErrorCode::ValidationError, "duplicate signal label", "model.signals");
    T total = ScalarTraits<T>::zero();
    for (const auto& row : joint_)
      for (const auto& v : row) {
        if constexpr (!is_exact_v<T>) {
          if (!std::isfinite(v)) throw Error(ErrorCode::ValidationError, "joint entries must be finite", "model.joint");
        }
        if (v < 0) throw Error(ErrorCode::ValidationError, "joint entries must be nonnegative", "model.joint");
        total += v;
      }
    if (!nearly_equal(total, ScalarTraits<T>::one()))
      throw Error(ErrorCode::ValidationError, "joint table sums to " + format_scalar(T(total)), "model.joint");
  }

  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<std::string>& signals() const noexcept { return signals_; }
  const std::vector<std::vector<T>>& joint() const noexcept { return joint_; }
  std::size_t num_states() const noexcept { return states_.size(); }
  std::size_t num_signals() const noexcept { return signals_.size(); }
  const T& at(std::size_t x, std::size_t s) const { return joint_.at(x).at(s); }

  std::optional<std::size_t> signal_index(const std::string& label) const {
    for (std::size_t j = 0; j < signals_.size(); ++j)
      if (signals_[j] == label) return j;
    return std::nullopt;
  }
  std::size_t ominus_index() const { return *signal_index(kOminus); }

  /// Q_X: row sums.
  FiniteDistribution<T> x_marginal() const {
    std::vector<T> m(states_.size(), ScalarTraits<T>::zero());
    for (std::size_t x = 0; x < states_.size(); ++x)
      for (const auto& v : joint_[x]) m[x] += v;
    return make_distribution(std::move(m));
  }

  /// Q_S: column sums, aligned with signals().
  std::vector<T> s_marginal() const {
    std::vector<T> m(signals_.size(), ScalarTraits<T>::zero());
    for (const auto& row : joint_)
      for (std::size_t j = 0; j < row.size(); ++j) m[j] += row[j];
    return m;
  }

  /// nu(s, .) for signal index s; nullopt when Q_S(s) = 0.
  std::optional<FiniteDistribution<T>> kernel(std::size_t s) const {
    T col = ScalarTraits<T>::zero();
    for (const auto& row : joint_) col += row.at(s);
    if (!(col > 0)) return std::nullopt;
    std::vector<T> v;
    for (const auto& row : joint_) v.push_back(row[s] / col);
    return make_distribution(std::move(v));
  }

  template <class U>
  SubjectiveModel<U> cast() const {
    std::vector<std::vector<U>> j;
    for (const auto& row : joint_) {
      std::vector<U> r;
      for (const auto& v : row) {
        if constexpr (std::is_same_v<U, T>) {
          r.push_back(v);
        } else if constexpr (is_exact_v<U>) {
          r.push_back(rational_from_double(to_double(v)));
        } else {
          r.push_back(to_double(v));
        }
      }
      j.push_back(std::move(r));
    }
    return SubjectiveModel<U>(states_, signals_, std::move(j));
  }

 private:
  FiniteDistribution<T> make_distribution(std::vector<T> v) const {
    if constexpr (is_exact_v<T>) {
      return FiniteDistribution<T>(states_, std::move(v));
    } else {
      return FiniteDistribution<T>::normalized(states_, std::move(v));
    }
  }

  std::vector<std::string> states_;
  std::vector<std::string> signals_;
  std::vector<std::vector<T>> joint_;
};

/// True law of signals. Under the identity labeling each signal is named by
/// the ensemble entry (posterior) it induces.
template <class T>
class TrueSignalModel {
 public:
  TrueSignalModel(std::vector<std::string> signals, std::vector<T> probs)
      : signals_(std::move(signals)), probs_(std::move(probs)) {
    if (signals_.empty() || signals_.size() != probs_.size())
      throw Error(ErrorCode::ValidationError, "true signals need one probability per label", "true_signals");
    if (std::set<std::string>(signals_.begin(), signals_.end()).size() != signals_.size())
      throw Error(ErrorCode::ValidationError, "duplicate true signal label", "true_signals");
    T total = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < signals_.size(); ++i) {
      if (signals_[i] == kOminus)
        throw Error(ErrorCode::ValidationError, "the reserved signal cannot carry true probability", "true_signals");
      if (probs_[i] < 0)
        throw Error(ErrorCode::ValidationError, "true signal probabilities must be nonnegative", "true_signals.probs");
      total += probs_[i];
    }
    if (!nearly_equal(total, ScalarTraits<T>::one()))
      throw Error(ErrorCode::ValidationError, "true signal probabilities must sum to 1", "true_signals.probs");
  }

  /// Identity labeling: P(s = entry label) = entry weight.
  static TrueSignalModel from_ensemble(const FiniteEnsemble<T>& ensemble) {
    std::vector<std::string> s;
    std::vector<T> p;
    for (const auto& e : ensemble.entries()) {
      s.push_back(e.label);
      p.push_back(e.weight);
    }
    return TrueSignalModel(std::move(s), std::move(p));
  }

  const std::vector<std::string>& signals() const noexcept { return signals_; }
  const std::vector<T>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return signals_.size(); }

  T prob(const std::string& label) const {
    for (std::size_t i = 0; i < signals_.size(); ++i)
      if (signals_[i] == label) return probs_[i];
    return ScalarTraits<T>::zero();
  }

  template <class U>
  TrueSignalModel<U> cast() const {
    std::vector<U> p;
    for (const auto& v : probs_) {
      if constexpr (std::is_same_v<U, T>) {
        p.push_back(v);
      } else if constexpr (is_exact_v<U>) {
        p.push_back(rational_from_double(to_double(v)));
      } else {
        p.push_back(to_double(v));
      }
    }
    return TrueSignalModel<U>(signals_, std::move(p));
  }

 private:
  std::vector<std::string> signals_;
  std::vector<T> probs_;
};

/// Tolerance used by verify_model. With zero_pattern set, two probabilities
/// only match when both or neither are zero.
template <class T>
struct VerifyOptions {
  T tolerance = ScalarTraits<T>::tolerance();
  bool zero_pattern = true;
};

/// Outcome of checking conditions (a), (b), (c) of the consistency definition.
template <class T>
struct ModelReport {
  bool labels_ok = true;
  bool prior_matches = true;         // (a) Q_X equals the prior
  bool absolutely_continuous = true; // (b) Q_S > 0 wherever P > 0
  bool conditionals_match = true;    // (c) nu(s, .) equals the posterior labeled s
  bool pushforward_matches = true;   // (c) P-law of nu(s, .) equals the ensemble
  std::vector<T> x_marginal;
  std::vector<T> s_marginal;
  std::vector<T> pushforward;        // aligned with ensemble entries
  std::vector<std::string> failures;

  bool condition_a() const { return labels_ok && prior_matches; }
  bool condition_b() const { return labels_ok && absolutely_continuous; }
  bool condition_c() const { return labels_ok && conditionals_match && pushforward_matches; }
  bool ok() const { return condition_a() && condition_b() && condition_c(); }
};

namespace detail {
template <class T>
bool prob_close(const T& a, const T& b, const VerifyOptions<T>& opt) {
  if (opt.zero_pattern && ((a == 0) != (b == 0))) return false;
  return nearly_equal(a, b, opt.tolerance);
}

template <class T>
bool dist_close(const FiniteDistribution<T>& a, const FiniteDistribution<T>& b, const VerifyOptions<T>& opt) {
  if (!a.same_states(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!prob_close(a[i], b[i], opt)) return false;
  return true;
}
}  // namespace detail

/// Checks a subjective model against the observables (prior, ensemble, true
/// signal law). Report-style: never throws on a failing model.
template <class T>
ModelReport<T> verify_model(const SubjectiveModel<T>& model, const FiniteDistribution<T>& prior,
                            const FiniteEnsemble<T>& ensemble, const TrueSignalModel<T>& true_signals,
                            const VerifyOptions<T>& opt = {}) {
  ModelReport<T> rep;
  if (model.states() != prior.states()) {
    rep.labels_ok = false;
    rep.failures.push_back("model states differ from prior states");
    return rep;
  }
  if (!ensemble.is_finite()) {
    rep.labels_ok = false;
    rep.failures.push_back("ensemble posteriors are not finite distributions");
    return rep;
  }
  for (std::size_t i = 0; i < ensemble.size(); ++i)
    if (!ensemble.finite_posterior(i).same_states(prior)) {
      rep.labels_ok = false;
      rep.failures.push_back("posterior '" + ensemble[i].label + "' uses different states");
      return rep;
    }
  std::vector<std::size_t> sig_idx;
  for (const auto& s : true_signals.signals()) {
    auto j = model.signal_index(s);
    if (!j) {
      rep.labels_ok = false;
      rep.failures.push_back("true signal '" + s + "' missing from model");
      return rep;
    }
    sig_idx.push_back(*j);
  }

  // (a)
  const auto& joint = model.joint();
  rep.x_marginal.assign(model.num_states(), ScalarTraits<T>::zero());
  for (std::size_t x = 0; x < model.num_states(); ++x)
    for (const auto& v : joint[x]) rep.x_marginal[x] += v;
  for (std::size_t x = 0; x < model.num_states(); ++x)
    if (!detail::prob_close(rep.x_marginal[x], prior[x], opt)) {
      rep.prior_matches = false;
      rep.failures.push_back("(a) Q_X(" + prior.states()[x] + ") = " + format_scalar(rep.x_marginal[x]) +
                             " but prior gives " + format_scalar(prior[x]));
    }

  // (b)
  rep.s_marginal = model.s_marginal();
  for (std::size_t i = 0; i < true_signals.size(); ++i)
    if (true_signals.probs()[i] > 0 && !(rep.s_marginal[sig_idx[i]] > 0)) {
      rep.absolutely_continuous = false;
      rep.failures.push_back("(b) signal '" + true_signals.signals()[i] + "' has true mass but Q_S = 0");
    }

  // (c)
  rep.pushforward.assign(ensemble.size(), ScalarTraits<T>::zero());
  for (std::size_t i = 0; i < true_signals.size(); ++i) {
    const T& ps = true_signals.probs()[i];
    if (!(ps > 0)) continue;
    const std::string& label = true_signals.signals()[i];
    auto nu = model.kernel(sig_idx[i]);
    if (!nu) {
      rep.conditionals_match = false;
      rep.pushforward_matches = false;
      rep.failures.push_back("(c) posterior at signal '" + label + "' undefined");
      continue;
    }
    auto labeled = ensemble.index_of_label(label);
    if (labeled && !detail::dist_close(*nu, ensemble.finite_posterior(*labeled), opt)) {
      rep.conditionals_match = false;
      rep.failures.push_back("(c) posterior at signal '" + label + "' is " + nu->to_string() + ", expected " +
                             ensemble.finite_posterior(*labeled).to_string());
    }
    std::optional<std::size_t> target;
    if (labeled && detail::dist_close(*nu, ensemble.finite_posterior(*labeled), opt)) {
      target = labeled;
    } else {
      for (std::size_t e = 0; e < ensemble.size() && !target; ++e)
        if (detail::dist_close(*nu, ensemble.finite_posterior(e), opt)) target = e;
    }
    if (!target) {
      rep.pushforward_matches = false;
      rep.failures.push_back("(c) posterior " + nu->to_string() + " at signal '" + label + "' is not in the ensemble");
      continue;
    }
    rep.pushforward[*target] += ps;
  }
  if (rep.pushforward_matches) {
    for (std::size_t e = 0; e < ensemble.size(); ++e)
      if (!nearly_equal(rep.pushforward[e], ensemble[e].weight, opt.tolerance)) {
        rep.pushforward_matches = false;
        rep.failures.push_back("(c) posterior '" + ensemble[e].label + "' arises with probability " +
                               format_scalar(rep.pushforward[e]) + ", expected " + format_scalar(ensemble[e].weight));
      }
  }
  return rep;
}

/// Checks Q(D x E) = sum over s in E of nu(s, D) Q_S(s) for every pair of
/// label subsets (D, E), with nu taken from the model's columns. Columns with
/// zero total must be identically zero. Only feasible for small tables.
template <class T>
bool regular_conditional_identity_holds(const SubjectiveModel<T>& model) {
  const std::size_t n = model.num_states(), m = model.num_signals();
  if (n + m > 20) throw Error(ErrorCode::SearchSpaceTooLarge, "too many labels for subset enumeration");
  auto qs = model.s_marginal();
  std::vector<std::optional<FiniteDistribution<T>>> nu;
  for (std::size_t s = 0; s < m; ++s) nu.push_back(model.kernel(s));
  for (std::size_t dmask = 0; dmask < (std::size_t{1} << n); ++dmask)
    for (std::size_t emask = 0; emask < (std::size_t{1} << m); ++emask) {
      T lhs = ScalarTraits<T>::zero(), rhs = ScalarTraits<T>::zero();
      for (std::size_t s = 0; s < m; ++s) {
        if (!(emask >> s & 1)) continue;
        for (std::size_t x = 0; x < n; ++x)
          if (dmask >> x & 1) lhs += model.at(x, s);
        if (nu[s]) {
          T mass = ScalarTraits<T>::zero();
          for (std::size_t x = 0; x < n; ++x)
            if (dmask >> x & 1) mass += (*nu[s])[x];
          rhs += mass * qs[s];
        }
      }
      if (!nearly_equal(lhs, rhs)) return false;
    }
  return true;
}

}  // namespace mispec
