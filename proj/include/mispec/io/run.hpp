#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mispec/alt_notions/notions.hpp"
#include "mispec/diagnostic/diagnostic.hpp"
#include "mispec/io/instance.hpp"
#include "mispec/io/panel.hpp"
#include "mispec/io/report.hpp"
#include "mispec/oracle/oracle.hpp"
#include "mispec/rationalizer/rationalizer.hpp"

namespace mispec::io {

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitViolation = 3 };

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"check",     "rationalize", "verify",   "classify", "tails",
                                          "partition", "diagnostic",  "simulate", "aggregate"};
  return c;
}

struct RunOptions {
  std::optional<Mode> mode;
  PartitionKind partition = PartitionKind::Trivial;
  double width = 1.0;
  double theta = 1.0;
  Centering centering = Centering::Centered;
  std::uint64_t seed = kDefaultSeed;
  std::size_t draws = 100000;
  unsigned threads = 1;
  std::optional<std::string> model_path;
  std::optional<std::string> plot_data;
  std::optional<std::string> output;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string out;  // canonical JSON report
  std::string err;  // diagnostics for stderr
};

inline int exit_code_for(ErrorCode c) {
  return c == ErrorCode::LadderViolation || c == ErrorCode::Internal ? kExitViolation : kExitInput;
}

namespace detail {

struct Csv {
  std::ostringstream text;
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text << (i ? "," : "") << cells[i];
    text << '\n';
  }
};

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string cell(const T& x) {
  if constexpr (is_exact_v<T>) {
    return num(to_double(x));
  } else {
    return num(x);
  }
}

template <class T>
std::string finite_plot(const FiniteInstance<T>& fi) {
  Csv csv;
  std::vector<std::string> head{"state", "prior", "average_posterior"};
  for (const auto& e : fi.ensemble.entries()) head.push_back("posterior:" + e.label);
  csv.row(head);
  auto avg = average_finite_posterior(fi.ensemble);
  for (std::size_t x = 0; x < fi.prior.size(); ++x) {
    std::vector<std::string> r{fi.states()[x], cell(fi.prior[x]), cell(avg[x])};
    for (std::size_t i = 0; i < fi.ensemble.size(); ++i) r.push_back(cell(fi.ensemble.finite_posterior(i)[x]));
    csv.row(r);
  }
  return csv.text.str();
}

inline std::pair<double, double> plot_range(const std::vector<const ParametricDistribution*>& laws) {
  double lo = 0, hi = 0;
  for (const auto* d : laws) {
    Interval s = d->support();
    double a = d->is_atomic() ? s.lo : d->tail_point(Side::Left, 1e-4);
    double b = d->is_atomic() ? s.hi : d->tail_point(Side::Right, 1e-4);
    lo = std::min(lo, std::isfinite(s.lo) ? s.lo : a);
    hi = std::max(hi, std::isfinite(s.hi) ? s.hi : b);
  }
  double pad = 0.05 * (hi - lo + 1);
  return {lo - pad, hi + pad};
}

inline std::string continuous_plot(const ContinuousInstance& ci) {
  Csv csv;
  std::vector<std::string> head{"x", "prior"};
  std::vector<ParametricDistribution> curves;
  if (const auto* f = std::get_if<PointMassFamily>(&ci.ensemble)) {
    head.push_back("location_law");
    curves.push_back(f->location_law);
  } else {
    const auto& ens = std::get<FiniteEnsemble<double>>(ci.ensemble);
    head.push_back("average_posterior");
    curves.push_back(average_parametric_posterior(ens));
    for (std::size_t i = 0; i < ens.size(); ++i) {
      head.push_back("posterior:" + ens[i].label);
      curves.push_back(ens.parametric_posterior(i));
    }
  }
  csv.row(head);
  std::vector<const ParametricDistribution*> laws{&ci.prior};
  for (const auto& c : curves) laws.push_back(&c);
  auto [lo, hi] = plot_range(laws);
  const int n = 801;
  for (int i = 0; i < n; ++i) {
    double x = lo + (hi - lo) * i / (n - 1);
    std::vector<std::string> r{num(x), num(ci.prior.pdf(x))};
    for (const auto& c : curves) r.push_back(num(c.is_atomic() ? 0.0 : c.pdf(x)));
    csv.row(r);
  }
  return csv.text.str();
}

inline Json load_json_file(const std::string& path) { return parse_json_text(read_file(path), path); }

template <class T>
TrueSignalModel<T> identity_signals(const FiniteInstance<T>& fi) {
  auto ts = fi.signals();
  auto id = TrueSignalModel<T>::from_ensemble(fi.ensemble);
  if (ts.signals() != id.signals() || ts.probs() != id.probs())
    throw Error(ErrorCode::ValidationError,
                "construction needs the identity labeling: one true signal per entry carrying its weight", "true_signals");
  return ts;
}

template <class T>
Json rationalize_finite(const FiniteInstance<T>& fi, const RunOptions& opt) {
  auto verdict = check_finite_support(fi.prior, fi.ensemble, {opt.partition});
  if (!is_consistent(verdict)) return {{"outcome", outcome_name(verdict)}, {"verdict", to_json(verdict)}};
  auto ts = identity_signals(fi);
  auto built = construct_subjective_model(fi.prior, fi.ensemble, ts, make_partition(opt.partition, fi.ensemble.size()));
  auto report = verify_model(built.model, fi.prior, fi.ensemble, ts);
  Json certs = Json::array();
  for (const auto& c : built.certificates) certs.push_back(to_json(c));
  Json cells = Json::array();
  for (const auto& c : built.cells) cells.push_back(c);
  Json j = {{"outcome", "Consistent"},
            {"model", to_json(built.model)},
            {"certificates", certs},
            {"cells", cells},
            {"partition", to_string(opt.partition)},
            {"ominus_mass", scalar_json(built.ominus_mass)},
            {"true_signals", to_json(ts)},
            {"report", to_json(report)}};
  j["ominus_posterior"] = built.ominus_posterior ? to_json(*built.ominus_posterior) : Json(nullptr);
  if (!report.ok()) throw Error(ErrorCode::Internal, "constructed model failed verification");
  return j;
}

template <class T>
SubjectiveModel<T> supplied_model(const ProblemInstance& inst, const RunOptions& opt) {
  if (opt.model_path) return model_from_json<T>(load_json_file(*opt.model_path), "");
  if (inst.model) return model_from_json<T>(*inst.model, "model");
  throw Error(ErrorCode::ValidationError, "no model supplied: pass --model or include a 'model' field", "model");
}

template <class T>
Json verify_finite(const ProblemInstance& inst, const FiniteInstance<T>& fi, const RunOptions& opt) {
  auto model = supplied_model<T>(inst, opt);
  auto rep = verify_model(model, fi.prior, fi.ensemble, fi.signals());
  Json j = to_json(rep);
  if (rep.labels_ok && model.num_states() + model.num_signals() <= 20)
    j["regular_conditional_identity"] = regular_conditional_identity_holds(model);
  return j;
}

template <class T>
Json classify_finite(const FiniteInstance<T>& fi) {
  auto ladder = classify(fi.prior, fi.ensemble);
  return {{"ladder", to_json(ladder)},
          {"average_posterior", to_json(average_finite_posterior(fi.ensemble))},
          {"shmaya_yariv", to_json(shmaya_yariv_test(fi.prior, fi.ensemble))}};
}

template <class T>
Json simulate_finite(const ProblemInstance& inst, const FiniteInstance<T>& fi, const RunOptions& opt) {
  auto ts = fi.signals();
  std::optional<SubjectiveModel<T>> model;
  std::string source;
  if (opt.model_path || inst.model) {
    model = supplied_model<T>(inst, opt);
    source = "supplied";
  } else {
    auto verdict = check_finite_support(fi.prior, fi.ensemble, {opt.partition});
    if (!is_consistent(verdict))
      throw Error(ErrorCode::ValidationError, "instance is inconsistent; supply a model to simulate", "model");
    model = construct_subjective_model(fi.prior, fi.ensemble, identity_signals(fi),
                                       make_partition(opt.partition, fi.ensemble.size()))
                .model;
    source = "constructed";
  }
  auto law = monte_carlo_posterior_law(*model, ts, opt.draws, opt.seed);
  Json expected = Json::array();
  for (const auto& e : law) {
    T w = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < fi.ensemble.size(); ++i) {
      auto p = fi.ensemble.finite_posterior(i).template cast<double>();
      bool same = true;
      for (std::size_t x = 0; x < p.size(); ++x) same = same && std::fabs(p[x] - e.posterior[x]) <= 1e-9;
      if (same) w += fi.ensemble[i].weight;
    }
    expected.push_back(scalar_json(w));
  }
  return {{"model_source", source}, {"draws", opt.draws}, {"seed", opt.seed}, {"law", to_json(law)},
          {"ensemble_weights", expected}};
}

inline Json tails_continuous(const ContinuousInstance& ci) {
  Json j = {{"prior", ci.prior.describe()}};
  if (std::holds_alternative<PointMassFamily>(ci.ensemble)) {
    j["posteriors"] = Json::array();
    j["note"] = "point-mass posteriors carry no tails";
    j["violation"] = false;
    return j;
  }
  const auto& ens = std::get<FiniteEnsemble<double>>(ci.ensemble);
  Json rows = Json::array();
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto& q = ens.parametric_posterior(i);
    rows.push_back({{"entry", i}, {"label", ens[i].label}, {"law", q.describe()}, {"verdict", to_json(tail_order_compare(ci.prior, q))}});
  }
  j["posteriors"] = rows;
  auto tv = tail_inconsistency_test<double>(ci.prior, ci.ensemble);
  j["violation"] = tv.has_value();
  return j;
}

inline Json diagnostic_run(const ProblemInstance& inst, const ContinuousInstance& ci, const RunOptions& opt,
                           std::string* plot) {
  const auto* n = std::get_if<Normal>(&ci.prior.variant());
  if (!n) throw Error(ErrorCode::ValidationError, "diagnostic needs a normal prior", "prior");
  if (!inst.signal_noise) throw Error(ErrorCode::ValidationError, "diagnostic needs signal_noise.variance", "signal_noise");
  GaussianPrior prior{n->mean, n->variance};
  SignalNoise noise{*inst.signal_noise};
  auto grid = signal_grid(-5, 5, 0.1);
  auto model = misspecified_model(opt.theta, noise, opt.centering);
  auto rep = equivalence_report(prior, noise, opt.theta, opt.centering, grid);
  Json j = {{"theta", opt.theta},
            {"centering", to_string(opt.centering)},
            {"kalman_gain", kalman_gain(prior.variance, noise.variance)},
            {"model", {{"slope", model.slope}, {"noise_variance", model.noise_variance}}},
            {"equivalence", to_json(rep)},
            {"grain", to_json(diagnostic_grain_report(prior, noise, opt.theta))}};
  if (plot) {
    Csv csv;
    csv.row({"s", "correct_mean", "diagnostic_mean", "misspecified_mean", "posterior_variance"});
    for (double s : grid) {
      auto d = diagnostic_posterior(prior, noise, s, opt.theta);
      csv.row({num(s), num(correct_posterior(prior, noise, s).mean), num(d.mean),
               num(misspecified_posterior(prior, model, s).mean), num(d.variance)});
    }
    *plot = csv.text.str();
  }
  return j;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

[[noreturn]] inline void mismatch(const std::string& command, const std::string& need) {
  throw Error(ErrorCode::UnsupportedPair, "'" + command + "' needs " + need);
}

}  // namespace detail

/// Executes one command on an input file and renders the canonical report.
inline RunResult run(const std::string& command, const std::string& input, const RunOptions& opt = {}) {
  RunResult res;
  try {
    Json result;
    std::optional<std::string> plot;
    if (command == "aggregate") {
      auto inst = aggregate_panel(load_panel(input), opt.mode.value_or(Mode::Rational));
      result = to_json(inst);
      res.out = canonical_dump(result);
      if (opt.output) detail::write_file(*opt.output, res.out);
      return res;
    }
    if (std::find(commands().begin(), commands().end(), command) == commands().end())
      throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
    Json raw = detail::load_json_file(input);
    if (opt.mode && raw.is_object()) raw["mode"] = to_string(*opt.mode);
    ProblemInstance inst = parse_instance(raw);

    auto finite = [&](auto&& f) -> Json {
      if (auto* r = std::get_if<FiniteInstance<Rational>>(&inst.body)) return f(*r);
      if (auto* d = std::get_if<FiniteInstance<double>>(&inst.body)) return f(*d);
      detail::mismatch(command, "a finite state space");
    };
    auto continuous = [&]() -> const ContinuousInstance& {
      if (auto* c = std::get_if<ContinuousInstance>(&inst.body)) return *c;
      detail::mismatch(command, "a real-line state space");
    };

    if (command == "check") {
      if (inst.is_finite()) {
        result = finite([&](const auto& fi) { return to_json(check_finite_support(fi.prior, fi.ensemble, {opt.partition})); });
      } else {
        const auto& ci = continuous();
        if (const auto* f = std::get_if<PointMassFamily>(&ci.ensemble)) {
          result = to_json(partition_prover(ci.prior, *f, opt.width, {1e-12, opt.threads}));
        } else {
          result = to_json(check_parametric_ensemble(ci.prior, std::get<FiniteEnsemble<double>>(ci.ensemble)));
        }
      }
    } else if (command == "rationalize") {
      result = finite([&](const auto& fi) { return detail::rationalize_finite(fi, opt); });
    } else if (command == "verify") {
      result = finite([&](const auto& fi) { return detail::verify_finite(inst, fi, opt); });
    } else if (command == "classify") {
      result = finite([&](const auto& fi) { return detail::classify_finite(fi); });
    } else if (command == "simulate") {
      result = finite([&](const auto& fi) { return detail::simulate_finite(inst, fi, opt); });
    } else if (command == "tails") {
      result = detail::tails_continuous(continuous());
    } else if (command == "partition") {
      const auto& ci = continuous();
      const auto* f = std::get_if<PointMassFamily>(&ci.ensemble);
      if (!f) detail::mismatch(command, "a point-mass family ensemble");
      result = to_json(partition_prover(ci.prior, *f, opt.width, {1e-12, opt.threads}));
      result["width"] = opt.width;
    } else if (command == "diagnostic") {
      std::string csv;
      result = detail::diagnostic_run(inst, continuous(), opt, opt.plot_data ? &csv : nullptr);
      if (opt.plot_data) plot = csv;
    }

    if (opt.plot_data && !plot) {
      if (auto* r = std::get_if<FiniteInstance<Rational>>(&inst.body)) plot = detail::finite_plot(*r);
      else if (auto* d = std::get_if<FiniteInstance<double>>(&inst.body)) plot = detail::finite_plot(*d);
      else plot = detail::continuous_plot(std::get<ContinuousInstance>(inst.body));
    }
    Json report = {{"command", command}, {"schema_version", kSchemaVersion}, {"mode", to_string(inst.mode)}, {"result", result}};
    res.out = canonical_dump(report);
    if (opt.output) detail::write_file(*opt.output, res.out);
    if (opt.plot_data) detail::write_file(*opt.plot_data, *plot);
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.code());
    res.err = std::string("error: ") + e.what() + "\n";
    res.out.clear();
  } catch (const std::exception& e) {
    res.exit_code = kExitInput;
    res.err = std::string("error: ") + e.what() + "\n";
    res.out.clear();
  }
  return res;
}

}  // namespace mispec::io
