#pragma once

#include <string>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/grain/finite.hpp"
#include "mispec/measures/density_ratio.hpp"
#include "mispec/rationalizer/construct.hpp"
#include "mispec/rationalizer/verdict.hpp"

namespace mispec {

struct FiniteCheckOptions {
  PartitionKind partition = PartitionKind::Trivial;
};

/// Decides consistency for a finite ensemble over finitely many states.
///
/// The prior must contain a grain of the average posterior. The per-posterior
/// form (a grain of every realized posterior) is evaluated alongside and must
/// agree; disagreement is reported as an Internal error. On success a model
/// is built for the requested partition and re-verified.
template <class T>
ConsistencyVerdict<T> check_finite_support(const FiniteDistribution<T>& prior, const FiniteEnsemble<T>& ensemble,
                                           const FiniteCheckOptions& opt = {}) {
  if (!ensemble.is_finite()) throw Error(ErrorCode::MixedRepresentation, "ensemble posteriors are parametric");
  for (std::size_t i = 0; i < ensemble.size(); ++i) require_same_states(prior, ensemble.finite_posterior(i));

  auto avg = average_finite_posterior(ensemble);
  auto whole = grain_decompose_finite(prior, avg);
  bool every = true;
  for (std::size_t i = 0; i < ensemble.size(); ++i)
    every = every && has_grain(grain_decompose_finite(prior, ensemble.finite_posterior(i)));
  if (every != has_grain(whole))
    throw Error(ErrorCode::Internal, "grain of the average posterior and grain of every posterior disagree");

  if (!has_grain(whole)) {
    const auto& ng = std::get<NoGrain>(whole);
    SupportViolationWitness w;
    w.state = ng.witness_state;
    w.state_index = ng.witness_index;
    for (std::size_t i = 0; i < ensemble.size(); ++i)
      if (ensemble.finite_posterior(i)[*ng.witness_index] > 0) w.entries.push_back(i);
    w.detail = "average posterior charges state " + *ng.witness_state + ", which has zero prior probability";
    return Inconsistent{w};
  }

  auto ts = TrueSignalModel<T>::from_ensemble(ensemble);
  auto built = construct_subjective_model(prior, ensemble, ts, make_partition(opt.partition, ensemble.size()));
  auto report = verify_model(built.model, prior, ensemble, ts);
  if (!report.ok())
    throw Error(ErrorCode::Internal, "constructed model failed verification: " + report.failures.front());
  Consistent<T> c{built.model, built.certificates, {}, report, {}};
  for (const auto& cell : built.cells) {
    PartitionCell pc;
    pc.entries = cell;
    pc.mass = to_double(cell_weight(ensemble, std::span<const std::size_t>(cell)));
    c.cells.push_back(std::move(pc));
  }
  c.notes.push_back(to_string(opt.partition) + " partition, maximal epsilon per cell");
  c.notes.push_back("subjective-only signal mass " + format_scalar(built.ominus_mass));
  return c;
}

/// supp(avg) within supp(prior), which decides consistency over finite states.
template <class T>
bool support_inclusion_test(const FiniteDistribution<T>& prior, const FiniteDistribution<T>& avg) {
  require_same_states(prior, avg);
  for (std::size_t i = 0; i < prior.size(); ++i)
    if (avg[i] > 0 && !(prior[i] > 0)) return false;
  return true;
}

/// Support inclusion for laws with densities on a compact state space. The
/// prior must have compact support with a continuous, strictly positive
/// density on it; the average posterior must have a bounded density.
inline bool support_inclusion_test(const ParametricDistribution& prior, const ParametricDistribution& avg) {
  if (prior.is_atomic() || avg.is_atomic())
    throw Error(ErrorCode::HypothesisViolated, "support inclusion test needs laws with densities");
  if (!prior.has_continuous_positive_density() || !avg.has_continuous_positive_density())
    throw Error(ErrorCode::HypothesisViolated, "densities must be continuous and positive on their supports");
  if (!prior.support().bounded())
    throw Error(ErrorCode::HypothesisViolated, "support inclusion decides consistency only on a compact state space");
  return !detail::support_violation(avg, prior).has_value();
}

}  // namespace mispec
