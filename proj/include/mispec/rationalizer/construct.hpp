#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/grain/finite.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/rationalizer/model.hpp"

namespace mispec {

enum class PartitionKind { Trivial, Singleton };

inline std::string to_string(PartitionKind k) { return k == PartitionKind::Trivial ? "trivial" : "singleton"; }

inline std::vector<EntryCell> make_partition(PartitionKind kind, std::size_t entries) {
  std::vector<EntryCell> cells;
  if (kind == PartitionKind::Trivial) {
    EntryCell all;
    for (std::size_t i = 0; i < entries; ++i) all.push_back(i);
    cells.push_back(std::move(all));
  } else {
    for (std::size_t i = 0; i < entries; ++i) cells.push_back({i});
  }
  return cells;
}

/// A built model together with the per-cell data it was assembled from.
template <class T>
struct Construction {
  SubjectiveModel<T> model;
  std::vector<EntryCell> cells;
  std::vector<GrainCertificate<T>> certificates;  // one per cell, maximal epsilon
  T ominus_mass;
  std::optional<FiniteDistribution<T>> ominus_posterior;  // nu(ominus, .), absent when ominus_mass = 0
};

namespace detail {
template <class T>
void check_partition(const std::vector<EntryCell>& cells, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& c : cells) {
    if (c.empty()) throw Error(ErrorCode::ValidationError, "partition cell is empty", "partition");
    for (auto i : c) {
      if (i >= n) throw Error(ErrorCode::ValidationError, "partition refers to a missing entry", "partition");
      seen[i]++;
    }
  }
  for (int s : seen)
    if (s != 1) throw Error(ErrorCode::ValidationError, "partition must cover every entry exactly once", "partition");
}
}  // namespace detail

/// Builds a rationalizing model from per-cell grain certificates.
///
/// For each cell E_k with maximal epsilon_k and residual mu'_k:
///   Q_S(s)      = epsilon_k P(s) for signals s in E_k
///   Q_S(ominus) = 1 - sum_k epsilon_k F(E_k)
///   nu(s, .)    = posterior labeled s, nu(ominus, .) = mixture of the mu'_k
/// and Q(x, s) = nu(s, x) Q_S(s). Throws NoGrain when a cell lacks a grain.
template <class T>
Construction<T> construct_subjective_model(const FiniteDistribution<T>& prior, const FiniteEnsemble<T>& ensemble,
                                           const TrueSignalModel<T>& true_signals,
                                           std::optional<std::vector<EntryCell>> partition = std::nullopt) {
  if (!ensemble.is_finite()) throw Error(ErrorCode::MixedRepresentation, "construction needs finite posteriors");
  for (std::size_t i = 0; i < ensemble.size(); ++i) require_same_states(prior, ensemble.finite_posterior(i));
  // Identity labeling: one true signal per entry, carrying the entry weight.
  if (true_signals.size() != ensemble.size())
    throw Error(ErrorCode::ValidationError, "true signals must label the ensemble entries one to one", "true_signals");
  for (const auto& e : ensemble.entries()) {
    if (!nearly_equal(true_signals.prob(e.label), e.weight))
      throw Error(ErrorCode::ValidationError, "true probability of signal '" + e.label + "' differs from its weight",
                  "true_signals");
  }
  std::vector<EntryCell> cells = partition ? *partition : make_partition(PartitionKind::Trivial, ensemble.size());
  detail::check_partition<T>(cells, ensemble.size());

  const T zero = ScalarTraits<T>::zero(), one = ScalarTraits<T>::one();
  const std::size_t n = prior.size(), m = ensemble.size();
  std::vector<T> qs(m + 1, zero);
  std::vector<T> ominus_acc(n, zero);
  T eps_mass = zero;
  std::vector<GrainCertificate<T>> certs;
  for (const auto& cell : cells) {
    std::span<const std::size_t> view(cell);
    T fk = cell_weight(ensemble, view);
    auto avg = average_finite_posterior(ensemble, std::optional(view));
    auto r = grain_decompose_finite(prior, avg);
    if (!has_grain(r)) {
      const auto& ng = std::get<NoGrain>(r);
      throw Error(ErrorCode::NoGrain, "prior lacks a grain of a cell average: " + ng.detail);
    }
    auto cert = std::get<GrainCertificate<T>>(r);
    for (auto i : cell) qs[i] = cert.epsilon * ensemble[i].weight;
    eps_mass += cert.epsilon * fk;
    if (const auto* res = std::get_if<FiniteDistribution<T>>(&cert.residual)) {
      T w = (one - cert.epsilon) * fk;
      for (std::size_t x = 0; x < n; ++x) ominus_acc[x] += w * (*res)[x];
    }
    certs.push_back(std::move(cert));
  }
  T ominus_mass = one - eps_mass;
  if constexpr (!is_exact_v<T>) {
    if (ominus_mass < 1e-15) ominus_mass = zero;
  }
  qs[m] = ominus_mass;

  std::vector<std::string> signals;
  for (const auto& e : ensemble.entries()) signals.push_back(e.label);
  signals.push_back(kOminus);
  std::vector<std::vector<T>> joint(n, std::vector<T>(m + 1, zero));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& mu = ensemble.finite_posterior(j);
    for (std::size_t x = 0; x < n; ++x) joint[x][j] = mu[x] * qs[j];
  }
  std::optional<FiniteDistribution<T>> mu_prime;
  if (ominus_mass > 0) {
    // Q(x, ominus) = Q_S(ominus) mu'(x) = sum_k (1 - eps_k) F(E_k) mu'_k(x).
    for (std::size_t x = 0; x < n; ++x) joint[x][m] = ominus_acc[x];
    std::vector<T> mp;
    for (std::size_t x = 0; x < n; ++x) mp.push_back(ominus_acc[x] / ominus_mass);
    if constexpr (is_exact_v<T>) {
      mu_prime.emplace(prior.states(), std::move(mp));
    } else {
      mu_prime = FiniteDistribution<T>::normalized(prior.states(), std::move(mp));
    }
  }
  SubjectiveModel<T> model(prior.states(), std::move(signals), std::move(joint));
  return Construction<T>{std::move(model), std::move(cells), std::move(certs), ominus_mass, std::move(mu_prime)};
}

}  // namespace mispec
