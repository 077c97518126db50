#pragma once

#include <string>
#include <vector>

#include "mispec/alt_notions/notions.hpp"
#include "mispec/diagnostic/diagnostic.hpp"
#include "mispec/io/instance.hpp"
#include "mispec/oracle/oracle.hpp"
#include "mispec/rationalizer/verdict.hpp"

namespace mispec::io {

inline Json optional_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

inline Json to_json(const Interval& iv) { return {{"lo", iv.lo}, {"hi", iv.hi}}; }

template <class T>
Json to_json(const GrainCertificate<T>& cert) {
  Json residual = std::visit(
      [](const auto& r) -> Json {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ArbitraryResidual>) {
          return {{"kind", "arbitrary"}};
        } else if constexpr (std::is_same_v<R, SymbolicResidual>) {
          return {{"kind", "symbolic"}, {"formula", r.describe()}, {"p", to_json(r.p)}, {"q", to_json(r.q)},
                  {"epsilon", r.epsilon}};
        } else {
          return to_json(r);
        }
      },
      cert.residual);
  return {{"epsilon", scalar_json(cert.epsilon)}, {"c", scalar_json(cert.c)}, {"residual", residual}};
}

inline Json to_json(const NoGrain& ng) {
  Json j = {{"reason", to_string(ng.reason)}, {"detail", ng.detail}};
  if (ng.witness_state) j["witness_state"] = *ng.witness_state;
  if (ng.witness_point) j["witness_point"] = *ng.witness_point;
  if (ng.radius) j["radius"] = *ng.radius;
  return j;
}

inline Json to_json(const TailVerdict& v) {
  return {{"relation", to_string(v.relation)}, {"c", v.c}, {"witness_radius", optional_json(v.witness)}};
}

inline Json to_json(const PartitionCell& c) {
  Json j = {{"mass", c.mass}, {"analytic", c.analytic}};
  if (!c.entries.empty()) j["entries"] = c.entries;
  if (c.interval) j["interval"] = to_json(*c.interval);
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

template <class T>
Json to_json(const ModelReport<T>& r) {
  return {{"condition_a", r.condition_a()},
          {"condition_b", r.condition_b()},
          {"condition_c", r.condition_c()},
          {"prior_matches", r.prior_matches},
          {"absolutely_continuous", r.absolutely_continuous},
          {"conditionals_match", r.conditionals_match},
          {"pushforward_matches", r.pushforward_matches},
          {"x_marginal", scalars_json(r.x_marginal)},
          {"s_marginal", scalars_json(r.s_marginal)},
          {"pushforward", scalars_json(r.pushforward)},
          {"failures", r.failures},
          {"ok", r.ok()}};
}

inline Json to_json(const InconsistencyWitness& w) {
  Json j = std::visit(
      [](const auto& x) -> Json {
        using W = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<W, SupportViolationWitness>) {
          Json o = {{"entries", x.entries}, {"detail", x.detail}};
          if (x.state) o["state"] = *x.state;
          if (x.point) o["point"] = *x.point;
          return o;
        } else if constexpr (std::is_same_v<W, TailViolation>) {
          Json flagged = Json::array();
          for (const auto& f : x.flagged) flagged.push_back({{"entry", f.entry}, {"label", f.label}, {"verdict", to_json(f.verdict)}});
          return {{"flagged", flagged}};
        } else if constexpr (std::is_same_v<W, NoPartitionFound>) {
          Json o = {{"search_log", x.search_log}};
          if (x.failing_cell) o["failing_cell"] = to_json(*x.failing_cell);
          if (x.reason) o["reason"] = to_json(*x.reason);
          return o;
        } else {
          return {{"radius", optional_json(x.radius)}, {"detail", x.detail}};
        }
      },
      w);
  j["kind"] = witness_name(w);
  return j;
}

template <class T>
Json to_json(const ConsistencyVerdict<T>& v) {
  Json j = {{"outcome", outcome_name(v)}};
  if (const auto* c = std::get_if<Consistent<T>>(&v)) {
    if (c->model) j["model"] = to_json(*c->model);
    Json certs = Json::array();
    for (const auto& g : c->certificates) certs.push_back(to_json(g));
    j["certificates"] = certs;
    Json cells = Json::array();
    for (const auto& cell : c->cells) cells.push_back(to_json(cell));
    j["cells"] = cells;
    if (c->report) j["report"] = to_json(*c->report);
    j["notes"] = c->notes;
  } else if (const auto* i = std::get_if<Inconsistent>(&v)) {
    j["witness"] = to_json(i->witness);
  } else {
    j["reason"] = std::get<Undecided>(v).reason;
  }
  return j;
}

inline Json to_json(const NotionLadder& l) {
  return {{"bayes_plausible", l.bayes_plausible},
          {"shmaya_yariv", l.shmaya_yariv},
          {"misspecified_bayesian", l.misspecified_bayesian}};
}

template <class T>
Json to_json(const SYResult<T>& r) {
  if (const auto* c = std::get_if<SYCertificate<T>>(&r))
    return {{"feasible", true}, {"lambda", scalars_json(c->lambda)}, {"delta", scalar_json(c->delta)}};
  const auto& inf = std::get<SYInfeasible>(r);
  return {{"feasible", false}, {"reason", inf.reason}, {"delta_star", optional_json(inf.delta_star)}};
}

inline Json to_json(const EquivalenceReport& r) {
  return {{"max_mean_deviation", r.max_mean_deviation},
          {"max_variance_deviation", r.max_variance_deviation},
          {"max_variance_vs_closed_form", r.max_variance_vs_closed_form},
          {"variance_identity_exact", r.variance_identity_exact},
          {"mean_identity_exact", r.mean_identity_exact},
          {"worst_signal", r.worst_signal},
          {"signals", r.signals}};
}

inline Json to_json(const DiagnosticGrainReport& r) {
  return {{"prior_variance", r.prior_variance},       {"average_variance", r.average_variance},
          {"average_has_grain", r.average_has_grain}, {"average_detail", r.average_detail},
          {"cell_variance", r.cell_variance},         {"cells_have_grain", r.cells_have_grain}};
}

inline Json to_json(const std::vector<EmpiricalPosterior>& law) {
  Json a = Json::array();
  for (const auto& e : law)
    a.push_back({{"posterior", scalars_json(e.posterior.probs())},
                 {"count", e.count},
                 {"frequency", e.frequency},
                 {"std_error", e.std_error}});
  return a;
}

}  // namespace mispec::io
