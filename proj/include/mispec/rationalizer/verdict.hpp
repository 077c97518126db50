#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mispec/grain/certificate.hpp"
#include "mispec/grain/parametric.hpp"
#include "mispec/rationalizer/model.hpp"

namespace mispec {

/// One cell of the partition behind a verdict: a set of ensemble entries
/// (finite ensembles) or an interval of locations (point-mass families).
struct PartitionCell {
  std::vector<std::size_t> entries;
  std::optional<Interval> interval;
  double mass = 0.0;
  bool analytic = false;  // certified by a tail argument rather than a certificate
  std::string note;
};

template <class T>
struct Consistent {
  std::optional<SubjectiveModel<T>> model;
  std::vector<GrainCertificate<T>> certificates;  // aligned with the certified cells
  std::vector<PartitionCell> cells;
  std::optional<ModelReport<T>> report;
  std::vector<std::string> notes;
};

struct SupportViolationWitness {
  std::optional<std::string> state;
  std::optional<std::size_t> state_index;
  std::optional<double> point;
  std::vector<std::size_t> entries;  // posteriors charging the state
  std::string detail;
};

struct TailFlag {
  std::size_t entry;
  std::string label;
  TailVerdict verdict;
};

struct TailViolation {
  std::vector<TailFlag> flagged;
};

struct NoPartitionFound {
  std::vector<std::string> search_log;
  std::optional<Interval> failing_cell;
  std::optional<NoGrain> reason;
};

/// The average posterior has an unbounded density ratio that no heavier
/// |x|-tail explains (e.g. a one-sided tail or an interior singularity).
struct UnboundedDensityRatio {
  std::optional<double> radius;
  std::string detail;
};

using InconsistencyWitness = std::variant<SupportViolationWitness, TailViolation, NoPartitionFound, UnboundedDensityRatio>;

struct Inconsistent {
  InconsistencyWitness witness;
};

struct Undecided {
  std::string reason;
};

template <class T>
using ConsistencyVerdict = std::variant<Consistent<T>, Inconsistent, Undecided>;

template <class T>
bool is_consistent(const ConsistencyVerdict<T>& v) {
  return std::holds_alternative<Consistent<T>>(v);
}

template <class T>
bool is_inconsistent(const ConsistencyVerdict<T>& v) {
  return std::holds_alternative<Inconsistent>(v);
}

inline std::string witness_name(const InconsistencyWitness& w) {
  switch (w.index()) {
    case 0: return "SupportViolation";
    case 1: return "TailViolation";
    case 2: return "NoPartitionFound";
    default: return "UnboundedDensityRatio";
  }
}

template <class T>
std::string outcome_name(const ConsistencyVerdict<T>& v) {
  switch (v.index()) {
    case 0: return "Consistent";
    case 1: return "Inconsistent";
    default: return "Undecided";
  }
}

}  // namespace mispec
