#pragma once

#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/grain/parametric.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/rationalizer/verdict.hpp"

namespace mispec {

struct PartitionOptions {
  /// Mass of either law allowed beyond the horizon.
  double horizon_mass = 1e-12;
  /// Worker threads for cell evaluation; results merge in cell order.
  unsigned threads = 1;
};

namespace detail {

struct CellOutcome {
  Interval cell;
  double mass = 0.0;
  std::optional<GrainCertificate<double>> cert;
  std::optional<NoGrain> failure;
  std::optional<CertificateReport> report;
  std::string error;
};

inline CellOutcome evaluate_cell(const ParametricDistribution& prior, const PointMassFamily& family, Interval cell) {
  CellOutcome out;
  out.cell = cell;
  out.mass = family.location_law.mass_between(cell.lo, cell.hi);
  if (!(out.mass > 0)) return out;
  try {
    auto avg = cell_average_posterior(family, cell.lo, cell.hi);
    auto r = contains_grain_parametric(prior, avg);
    if (auto* ng = std::get_if<NoGrain>(&r)) {
      out.failure = *ng;
      return out;
    }
    out.cert = std::get<GrainCertificate<double>>(r);
    out.report = verify_certificate(prior, avg, *out.cert);
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

inline std::string cell_name(const Interval& c) { return "[" + format_short(c.lo) + "," + format_short(c.hi) + ")"; }

}  // namespace detail

/// Proves the interval-partition grain condition for a point-mass family.
///
/// Cells are [k w, (k+1) w). Every cell with positive family mass inside the
/// horizon H (beyond which both laws keep at most `horizon_mass`) gets a
/// verified grain certificate. Cells beyond H are certified by a tail
/// argument: each truncated cell law is compact, so its ratio to a prior with
/// continuous positive density on that side of the line is bounded, provided
/// the family's support beyond H lies inside the prior's support.
inline ConsistencyVerdict<double> partition_prover(const ParametricDistribution& prior, const PointMassFamily& family,
                                                   double width, const PartitionOptions& opt = {}) {
  if (prior.is_atomic()) throw Error(ErrorCode::HypothesisViolated, "partition prover needs a prior with a density");
  if (!prior.has_continuous_positive_density())
    throw Error(ErrorCode::HypothesisViolated, "prior density must be continuous and positive on its support");
  if (!(width > 0) || !std::isfinite(width)) throw Error(ErrorCode::InvalidArgument, "cell width must be positive");

  const auto& loc = family.location_law;
  double horizon = 0.0;
  for (const auto* d : {&prior, &loc}) {
    if (d->is_atomic()) {
      horizon = std::max(horizon, std::fabs(d->support().lo));
      continue;
    }
    horizon = std::max(horizon, std::fabs(d->tail_point(Side::Left, 0.5 * opt.horizon_mass)));
    horizon = std::max(horizon, std::fabs(d->tail_point(Side::Right, 0.5 * opt.horizon_mass)));
  }
  long long k_lo = static_cast<long long>(std::floor(-horizon / width));
  long long k_hi = static_cast<long long>(std::ceil(horizon / width));
  if (k_hi - k_lo > 2000000) throw Error(ErrorCode::SearchSpaceTooLarge, "too many cells for this width");
  std::vector<Interval> cells;
  for (long long k = k_lo; k < k_hi; ++k) cells.push_back({k * width, (k + 1) * width});
  const double h_lo = k_lo * width, h_hi = k_hi * width;

  std::vector<detail::CellOutcome> outcomes(cells.size());
  unsigned threads = std::max(1u, opt.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) outcomes[i] = detail::evaluate_cell(prior, family, cells[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) outcomes[i] = detail::evaluate_cell(prior, family, cells[i]);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<std::string> log;
  Consistent<double> ok;
  for (const auto& o : outcomes) {
    if (!(o.mass > 0)) continue;
    std::string name = detail::cell_name(o.cell);
    if (!o.error.empty()) return Undecided{"cell " + name + ": " + o.error};
    if (o.failure) {
      log.push_back("cell " + name + ": no grain (" + to_string(o.failure->reason) + ") " + o.failure->detail);
      return Inconsistent{NoPartitionFound{log, o.cell, o.failure}};
    }
    if (!o.report->ok()) {
      log.push_back("cell " + name + ": certificate failed verification: " + o.report->failures.front());
      return Undecided{"certificate for cell " + name + " failed grid verification"};
    }
    log.push_back("cell " + name + ": c = " + format_short(o.cert->c));
    PartitionCell pc;
    pc.interval = o.cell;
    pc.mass = o.mass;
    ok.certificates.push_back(*o.cert);
    ok.cells.push_back(std::move(pc));
  }

  // Cells beyond the horizon.
  Interval ls = loc.support(), ps = prior.support();
  for (Side side : {Side::Left, Side::Right}) {
    bool right = side == Side::Right;
    bool family_beyond = right ? ls.hi > h_hi : ls.lo < h_lo;
    if (!family_beyond) continue;
    double beyond_mass = right ? loc.mass_between(h_hi, kInf) : loc.mass_between(-kInf, h_lo);
    Interval tail_region = right ? Interval{h_hi, ls.hi} : Interval{ls.lo, h_lo};
    bool covered = ps.lo <= tail_region.lo && tail_region.hi <= ps.hi;
    TailClass cell_tail = TailClass::compact();
    bool lighter = prior.tail(side).is_compact() || compare_heaviness(cell_tail, prior.tail(side)) < 0;
    std::string where = right ? "[" + format_short(h_hi) + ",inf)" : "(-inf," + format_short(h_lo) + ")";
    if (!covered || !lighter) {
      log.push_back("tail cells " + where + ": family support leaves the prior support");
      NoGrain ng;
      ng.reason = NoGrain::Reason::SupportViolation;
      ng.witness_point = right ? std::max(h_hi, ps.hi) : std::min(h_lo, ps.lo);
      ng.detail = "family puts mass beyond the prior support on the " + std::string(right ? "right" : "left");
      return Inconsistent{NoPartitionFound{log, tail_region, ng}};
    }
    PartitionCell pc;
    pc.interval = tail_region;
    pc.mass = beyond_mass;
    pc.analytic = true;
    pc.note = "cells of width " + format_short(width) + " in " + where +
              " have compact truncated laws inside the support of a prior with continuous positive density";
    log.push_back("tail cells " + where + ": certified analytically");
    ok.cells.push_back(std::move(pc));
  }
  ok.notes = std::move(log);
  ok.notes.insert(ok.notes.begin(), "horizon [" + format_short(h_lo) + "," + format_short(h_hi) + ") with cell width " +
                                        format_short(width));
  return ok;
}

}  // namespace mispec
