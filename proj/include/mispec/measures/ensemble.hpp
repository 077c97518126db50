#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/core/scalar.hpp"
#include "mispec/measures/finite_distribution.hpp"
#include "mispec/measures/parametric.hpp"

namespace mispec {

template <class T>
using Posterior = std::variant<FiniteDistribution<T>, ParametricDistribution>;

template <class T>
struct EnsembleEntry {
  Posterior<T> posterior;
  T weight;
  std::string label;
};

/// Finitely supported distribution over posteriors.
///
/// Weights are strictly positive and sum to one; posteriors are pairwise
/// distinct and all share one representation. Entries without a label are
/// labeled by the posterior they carry.
template <class T>
class FiniteEnsemble {
 public:
  explicit FiniteEnsemble(std::vector<EnsembleEntry<T>> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error(ErrorCode::ValidationError, "ensemble has no entries");
    T total = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      auto& e = entries_[i];
      if (!(e.weight > 0))
        throw Error(ErrorCode::ValidationError, "weight must be positive", "ensemble.entries[" + std::to_string(i) + "].weight");
      total += e.weight;
      if (e.label.empty()) e.label = default_label(e.posterior);
      if (e.posterior.index() != entries_[0].posterior.index())
        throw Error(ErrorCode::MixedRepresentation, "ensemble mixes finite and parametric posteriors");
    }
    if (!nearly_equal(total, ScalarTraits<T>::one()))
      throw Error(ErrorCode::ValidationError, "weights sum to " + format_scalar(T(total)) + ", not 1", "ensemble.weights");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!labels.insert(entries_[i].label).second)
        throw Error(ErrorCode::ValidationError, "duplicate entry label '" + entries_[i].label + "'", "ensemble.entries");
      for (std::size_t j = 0; j < i; ++j)
        if (entries_[i].posterior == entries_[j].posterior)
          throw Error(ErrorCode::ValidationError, "posteriors must be pairwise distinct", "ensemble.entries");
    }
    if (is_finite()) {
      const auto& first = std::get<0>(entries_[0].posterior);
      for (const auto& e : entries_)
        if (!std::get<0>(e.posterior).same_states(first))
          throw Error(ErrorCode::StateMismatch, "posteriors are over different state lists");
    }
  }

  const std::vector<EnsembleEntry<T>>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const EnsembleEntry<T>& operator[](std::size_t i) const { return entries_[i]; }

  bool is_finite() const { return entries_[0].posterior.index() == 0; }
  bool is_parametric() const { return !is_finite(); }

  const FiniteDistribution<T>& finite_posterior(std::size_t i) const {
    if (!is_finite()) throw Error(ErrorCode::MixedRepresentation, "ensemble posteriors are parametric");
    return std::get<0>(entries_[i].posterior);
  }
  const ParametricDistribution& parametric_posterior(std::size_t i) const {
    if (!is_parametric()) throw Error(ErrorCode::MixedRepresentation, "ensemble posteriors are finite");
    return std::get<1>(entries_[i].posterior);
  }

  std::vector<T> weights() const {
    std::vector<T> w;
    for (const auto& e : entries_) w.push_back(e.weight);
    return w;
  }

  std::optional<std::size_t> index_of_label(const std::string& label) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].label == label) return i;
    return std::nullopt;
  }

  template <class U>
  FiniteEnsemble<U> cast() const {
    std::vector<EnsembleEntry<U>> out;
    for (const auto& e : entries_) {
      Posterior<U> p = std::visit(
          [](const auto& post) -> Posterior<U> {
            using P = std::decay_t<decltype(post)>;
            if constexpr (std::is_same_v<P, ParametricDistribution>) {
              return post;
            } else {
              return post.template cast<U>();
            }
          },
          e.posterior);
      U w;
      if constexpr (std::is_same_v<U, T>) {
        w = e.weight;
      } else if constexpr (is_exact_v<U>) {
        w = rational_from_double(to_double(e.weight));
      } else {
        w = to_double(e.weight);
      }
      out.push_back({std::move(p), w, e.label});
    }
    return FiniteEnsemble<U>(std::move(out));
  }

 private:
  static std::string default_label(const Posterior<T>& p) {
    if (const auto* f = std::get_if<0>(&p)) return f->to_string();
    return std::get<1>(p).describe();
  }

  std::vector<EnsembleEntry<T>> entries_;
};

/// Posterior is the point mass at Z, with Z drawn from `location_law`.
struct PointMassFamily {
  ParametricDistribution location_law;
};

template <class T>
using PosteriorEnsemble = std::variant<FiniteEnsemble<T>, PointMassFamily>;

/// A set of entry indices forming one cell of a partition of the ensemble.
using EntryCell = std::vector<std::size_t>;

namespace detail {
template <class T>
std::vector<std::size_t> resolve_cell(const FiniteEnsemble<T>& ensemble, std::optional<std::span<const std::size_t>> cell) {
  std::vector<std::size_t> idx;
  if (cell) {
    idx.assign(cell->begin(), cell->end());
  } else {
    for (std::size_t i = 0; i < ensemble.size(); ++i) idx.push_back(i);
  }
  for (auto i : idx)
    if (i >= ensemble.size()) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
  if (idx.empty()) throw Error(ErrorCode::ZeroMassCell, "cell has zero weight");
  return idx;
}
}  // namespace detail

/// Total F1 weight of a cell.
template <class T>
T cell_weight(const FiniteEnsemble<T>& ensemble, std::span<const std::size_t> cell) {
  T total = ScalarTraits<T>::zero();
  for (auto i : cell) total += ensemble[i].weight;
  return total;
}

/// Weight-renormalized mixture of the finite posteriors in `cell` (all
/// entries when omitted).
template <class T>
FiniteDistribution<T> average_finite_posterior(const FiniteEnsemble<T>& ensemble,
                                               std::optional<std::span<const std::size_t>> cell = std::nullopt) {
  if (!ensemble.is_finite()) throw Error(ErrorCode::MixedRepresentation, "ensemble posteriors are parametric");
  auto idx = detail::resolve_cell(ensemble, cell);
  const auto& states = ensemble.finite_posterior(0).states();
  std::vector<T> acc(states.size(), ScalarTraits<T>::zero());
  T total = ScalarTraits<T>::zero();
  for (auto i : idx) {
    const auto& post = ensemble.finite_posterior(i);
    const T& w = ensemble[i].weight;
    total += w;
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += w * post[x];
  }
  if (!(total > 0)) throw Error(ErrorCode::ZeroMassCell, "cell has zero weight");
  for (auto& a : acc) a /= total;
  if constexpr (is_exact_v<T>) {
    return FiniteDistribution<T>(states, std::move(acc));
  } else {
    return FiniteDistribution<T>::normalized(states, std::move(acc));
  }
}

namespace detail {
/// Recognizes an equal-weight pair of opposite exponentials with a common
/// rate, which is exactly a centred Laplace law.
inline std::optional<ParametricDistribution> as_laplace(const std::vector<std::pair<double, ParametricDistribution>>& parts) {
  if (parts.size() != 2) return std::nullopt;
  const auto* e0 = std::get_if<Exponential>(&parts[0].second.variant());
  const auto* e1 = std::get_if<Exponential>(&parts[1].second.variant());
  if (!e0 || !e1) return std::nullopt;
  if (e0->rate != e1->rate || e0->orientation == e1->orientation) return std::nullopt;
  if (std::fabs(parts[0].first - parts[1].first) > 1e-15) return std::nullopt;
  return ParametricDistribution::laplace(0.0, 1.0 / e0->rate);
}
}  // namespace detail

/// Weight-renormalized mixture of parametric posteriors. Single-component
/// mixtures collapse to the component, and a symmetric exponential pair
/// collapses to its Laplace law.
template <class T>
ParametricDistribution average_parametric_posterior(const FiniteEnsemble<T>& ensemble,
                                                    std::optional<std::span<const std::size_t>> cell = std::nullopt) {
  if (!ensemble.is_parametric()) throw Error(ErrorCode::MixedRepresentation, "ensemble posteriors are finite");
  auto idx = detail::resolve_cell(ensemble, cell);
  double total = 0.0;
  for (auto i : idx) total += to_double(ensemble[i].weight);
  if (!(total > 0)) throw Error(ErrorCode::ZeroMassCell, "cell has zero weight");
  std::vector<std::pair<double, ParametricDistribution>> parts;
  for (auto i : idx) parts.emplace_back(to_double(ensemble[i].weight) / total, ensemble.parametric_posterior(i));
  if (parts.size() == 1) return parts.front().second;
  if (auto lap = detail::as_laplace(parts)) return *lap;
  return ParametricDistribution::mixture(std::move(parts));
}

/// Average posterior of a point-mass family over the location cell [a, b):
/// the location law restricted to that cell.
inline ParametricDistribution cell_average_posterior(const PointMassFamily& family, double a, double b) {
  return ParametricDistribution::truncated(family.location_law, a, b);
}

}  // namespace mispec
