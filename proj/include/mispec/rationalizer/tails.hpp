#pragma once

#include <optional>
#include <string>

#include "mispec/core/error.hpp"
#include "mispec/grain/parametric.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/rationalizer/verdict.hpp"

namespace mispec {

/// Flags realized posteriors whose |x|-tails are heavier than the prior's.
/// Point-mass families never produce a flag: each posterior is an atom.
template <class T>
std::optional<TailViolation> tail_inconsistency_test(const ParametricDistribution& prior, const PosteriorEnsemble<T>& ensemble) {
  if (prior.support().bounded())
    throw Error(ErrorCode::HypothesisViolated, "tail test needs a prior with unbounded support");
  if (std::holds_alternative<PointMassFamily>(ensemble)) return std::nullopt;
  const auto& ens = std::get<FiniteEnsemble<T>>(ensemble);
  if (!ens.is_parametric()) throw Error(ErrorCode::MixedRepresentation, "tail test needs parametric posteriors");
  TailViolation tv;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    auto v = tail_order_compare(prior, ens.parametric_posterior(i));
    if (v.relation == TailVerdict::Relation::QHeavier) tv.flagged.push_back({i, ens[i].label, v});
  }
  if (tv.flagged.empty()) return std::nullopt;
  return tv;
}

/// Consistency for a finite ensemble of parametric posteriors: heavier-tailed
/// posteriors refute; otherwise the prior must contain a grain of the average
/// posterior. No explicit model is built over a continuum of states.
template <class T>
ConsistencyVerdict<double> check_parametric_ensemble(const ParametricDistribution& prior, const FiniteEnsemble<T>& ens) {
  if (!ens.is_parametric()) throw Error(ErrorCode::MixedRepresentation, "ensemble posteriors are finite");
  if (!prior.support().bounded()) {
    if (auto tv = tail_inconsistency_test<T>(prior, PosteriorEnsemble<T>(ens))) return Inconsistent{*tv};
  }
  for (std::size_t i = 0; i < ens.size(); ++i)
    if (ens.parametric_posterior(i).is_atomic())
      return Undecided{"atomic posteriors in a finite ensemble against a continuous prior are not supported"};
  auto avg = average_parametric_posterior(ens);
  auto r = contains_grain_parametric(prior, avg);
  if (const auto* ng = std::get_if<NoGrain>(&r)) {
    if (ng->reason == NoGrain::Reason::SupportViolation) {
      SupportViolationWitness w;
      w.point = ng->witness_point;
      for (std::size_t i = 0; i < ens.size(); ++i)
        if (w.point && ens.parametric_posterior(i).pdf(*w.point) > 0) w.entries.push_back(i);
      w.detail = ng->detail;
      return Inconsistent{w};
    }
    return Inconsistent{UnboundedDensityRatio{ng->radius, ng->detail}};
  }
  const auto& cert = std::get<GrainCertificate<double>>(r);
  auto rep = verify_certificate(prior, avg, cert);
  if (!rep.ok()) return Undecided{"grain certificate failed grid verification: " + rep.failures.front()};
  Consistent<double> c;
  c.certificates.push_back(cert);
  PartitionCell all;
  for (std::size_t i = 0; i < ens.size(); ++i) all.entries.push_back(i);
  all.mass = 1.0;
  c.cells.push_back(std::move(all));
  c.notes.push_back("prior contains a grain of the average posterior " + avg.describe() + " with c = " + format_short(cert.c));
  return c;
}

}  // namespace mispec
