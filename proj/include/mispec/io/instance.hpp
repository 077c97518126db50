#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mispec/io/canonical_json.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/rationalizer/model.hpp"

namespace mispec::io {

inline constexpr const char* kSchemaVersion = "1";

enum class Mode { Rational, Float };

inline std::string to_string(Mode m) { return m == Mode::Rational ? "rational" : "float"; }

inline Mode parse_mode(const std::string& s, const std::string& path = "mode") {
  if (s == "rational") return Mode::Rational;
  if (s == "float") return Mode::Float;
  throw Error(ErrorCode::ValidationError, "mode must be 'rational' or 'float'", path);
}

template <class T>
struct FiniteInstance {
  FiniteDistribution<T> prior;
  FiniteEnsemble<T> ensemble;
  std::optional<TrueSignalModel<T>> true_signals;

  /// Declared true signal law, or the identity labeling with entry weights.
  TrueSignalModel<T> signals() const {
    return true_signals ? *true_signals : TrueSignalModel<T>::from_ensemble(ensemble);
  }
  const std::vector<std::string>& states() const { return prior.states(); }
};

struct ContinuousInstance {
  ParametricDistribution prior;
  PosteriorEnsemble<double> ensemble;
};

/// The observables (prior, posterior law, true signal law) plus optional
/// extras used by individual commands.
struct ProblemInstance {
  Mode mode = Mode::Rational;
  std::variant<std::monostate, FiniteInstance<Rational>, FiniteInstance<double>, ContinuousInstance> body;
  std::optional<std::string> description;
  /// Variance of the true signal noise, for the diagnostic command.
  std::optional<double> signal_noise;
  /// A subjective model to check, for the verify command.
  std::optional<Json> model;

  bool is_finite() const { return body.index() == 1 || body.index() == 2; }
};

// ---------------------------------------------------------------------------
// Parametric laws

inline Json to_json(const ParametricDistribution& d) {
  Json params = Json::object();
  std::string family;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Normal>) {
          family = "normal";
          params = {{"mean", f.mean}, {"variance", f.variance}};
        } else if constexpr (std::is_same_v<F, Laplace>) {
          family = "laplace";
          params = {{"location", f.location}, {"scale", f.scale}};
        } else if constexpr (std::is_same_v<F, Exponential>) {
          family = "exponential";
          params = {{"rate", f.rate}, {"orientation", f.orientation == Orientation::Right ? "right" : "mirrored"}};
        } else if constexpr (std::is_same_v<F, Uniform>) {
          family = "uniform";
          params = {{"a", f.a}, {"b", f.b}};
        } else if constexpr (std::is_same_v<F, PointMass>) {
          family = "point_mass";
          params = {{"location", f.location}};
        } else if constexpr (std::is_same_v<F, Truncated>) {
          family = "truncated";
          params = {{"a", f.a}, {"b", f.b}, {"law", to_json(*f.inner)}};
        } else {
          family = "mixture";
          Json comps = Json::array();
          for (const auto& c : f.components) comps.push_back({{"weight", c.weight}, {"law", to_json(*c.law)}});
          params = {{"components", comps}};
        }
      },
      d.variant());
  return {{"kind", "parametric"}, {"family", family}, {"params", params}};
}

inline ParametricDistribution parametric_from_json(const Json& j, const std::string& path) {
  const auto& fam = require(j, "family", path);
  if (!fam.is_string()) throw Error(ErrorCode::ParseError, "family must be a string", join_path(path, "family"));
  std::string family = fam.get<std::string>();
  std::string pp = join_path(path, "params");
  const Json& p = require(j, "params", path);
  auto num = [&](const char* key) { return real_from_json(require(p, key, pp), join_path(pp, key)); };
  try {
    if (family == "normal") return ParametricDistribution::normal(num("mean"), num("variance"));
    if (family == "laplace") return ParametricDistribution::laplace(num("location"), num("scale"));
    if (family == "exponential") {
      Orientation o = Orientation::Right;
      if (p.contains("orientation")) {
        auto s = p.at("orientation").get<std::string>();
        if (s == "mirrored") {
          o = Orientation::Mirrored;
        } else if (s != "right") {
          throw Error(ErrorCode::ValidationError, "orientation must be 'right' or 'mirrored'", join_path(pp, "orientation"));
        }
      }
      return ParametricDistribution::exponential(num("rate"), o);
    }
    if (family == "uniform") return ParametricDistribution::uniform(num("a"), num("b"));
    if (family == "point_mass") return ParametricDistribution::point_mass(num("location"));
    if (family == "truncated")
      return ParametricDistribution::truncated(parametric_from_json(require(p, "law", pp), join_path(pp, "law")), num("a"),
                                               num("b"));
    if (family == "mixture") {
      const auto& comps = require(p, "components", pp);
      if (!comps.is_array()) throw Error(ErrorCode::ParseError, "components must be an array", join_path(pp, "components"));
      std::vector<std::pair<double, ParametricDistribution>> parts;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        std::string cp = join_path(pp, "components[" + std::to_string(i) + "]");
        parts.emplace_back(real_from_json(require(comps[i], "weight", cp), join_path(cp, "weight")),
                           parametric_from_json(require(comps[i], "law", cp), join_path(cp, "law")));
      }
      return ParametricDistribution::mixture(std::move(parts));
    }
  } catch (const Error& e) {
    if (!e.path().empty()) throw;
    throw Error(e.code() == ErrorCode::ParseError ? ErrorCode::ParseError : ErrorCode::ValidationError, e.message(), path);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what(), pp);
  }
  throw Error(ErrorCode::ValidationError, "unknown family '" + family + "'", join_path(path, "family"));
}

// ---------------------------------------------------------------------------
// Finite laws, ensembles, models

template <class T>
Json scalars_json(const std::vector<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(scalar_json(x));
  return a;
}

template <class T>
std::vector<T> scalars_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array", path);
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(scalar_from_json<T>(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <class T>
Json to_json(const FiniteDistribution<T>& d) {
  return {{"kind", "finite"}, {"probs", scalars_json(d.probs())}};
}

template <class T>
FiniteDistribution<T> finite_from_json(const Json& j, const std::vector<std::string>& states, const std::string& path) {
  const Json& probs = j.is_array() ? j : require(j, "probs", path);
  std::string pp = j.is_array() ? path : join_path(path, "probs");
  auto v = scalars_from_json<T>(probs, pp);
  if (v.size() != states.size())
    throw Error(ErrorCode::ValidationError,
                "expected " + std::to_string(states.size()) + " probabilities, got " + std::to_string(v.size()), pp);
  try {
    return FiniteDistribution<T>(states, std::move(v));
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, e.message(), pp);
  }
}

template <class T>
Json to_json(const FiniteEnsemble<T>& ens) {
  Json entries = Json::array();
  for (const auto& e : ens.entries()) {
    Json post = std::visit([](const auto& p) { return to_json(p); }, e.posterior);
    entries.push_back({{"posterior", post}, {"weight", scalar_json(e.weight)}, {"label", e.label}});
  }
  return {{"kind", "finite"}, {"entries", entries}};
}

template <class T>
FiniteEnsemble<T> ensemble_from_json(const Json& j, const std::optional<std::vector<std::string>>& states,
                                     const std::string& path) {
  const auto& entries = require(j, "entries", path);
  std::string ep = join_path(path, "entries");
  if (!entries.is_array()) throw Error(ErrorCode::ParseError, "entries must be an array", ep);
  std::vector<EnsembleEntry<T>> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string p = ep + "[" + std::to_string(i) + "]";
    const auto& e = entries[i];
    const auto& post = require(e, "posterior", p);
    std::string kind = post.is_object() && post.contains("kind") ? post.at("kind").get<std::string>() : "finite";
    Posterior<T> posterior = [&]() -> Posterior<T> {
      if (kind == "finite") {
        if (!states) throw Error(ErrorCode::ValidationError, "finite posterior on a real-line state space", join_path(p, "posterior"));
        return finite_from_json<T>(post, *states, join_path(p, "posterior"));
      }
      if (kind == "parametric") {
        if (states) throw Error(ErrorCode::ValidationError, "parametric posterior on a finite state space", join_path(p, "posterior"));
        return parametric_from_json(post, join_path(p, "posterior"));
      }
      throw Error(ErrorCode::ValidationError, "unknown posterior kind '" + kind + "'", join_path(p, "posterior.kind"));
    }();
    T w = scalar_from_json<T>(require(e, "weight", p), join_path(p, "weight"));
    std::string label = e.contains("label") ? e.at("label").get<std::string>() : "";
    if (label == kOminus) throw Error(ErrorCode::ValidationError, "label is reserved", join_path(p, "label"));
    out.push_back({std::move(posterior), w, label});
  }
  try {
    return FiniteEnsemble<T>(std::move(out));
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, e.message(), join_path(path, "weights"));
  }
}

template <class T>
Json to_json(const TrueSignalModel<T>& ts) {
  return {{"signals", ts.signals()}, {"probs", scalars_json(ts.probs())}};
}

template <class T>
TrueSignalModel<T> true_signals_from_json(const Json& j, const std::string& path) {
  auto signals = require(j, "signals", path).get<std::vector<std::string>>();
  auto probs = scalars_from_json<T>(require(j, "probs", path), join_path(path, "probs"));
  try {
    return TrueSignalModel<T>(std::move(signals), std::move(probs));
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, e.message(), path);
  }
}

template <class T>
Json to_json(const SubjectiveModel<T>& m) {
  Json rows = Json::array();
  for (const auto& r : m.joint()) rows.push_back(scalars_json(r));
  return {{"states", m.states()}, {"signals", m.signals()}, {"joint", rows}};
}

template <class T>
SubjectiveModel<T> model_from_json(const Json& j, const std::string& path) {
  // Accepts a bare model, {"model": ...}, or a full rationalize report.
  const Json* src = &j;
  std::string p = path;
  if (j.is_object() && j.contains("result") && j.at("result").is_object()) {
    src = &j.at("result");
    p = join_path(p, "result");
  }
  const Json& m = src->contains("model") ? src->at("model") : *src;
  if (src->contains("model")) p = join_path(p, "model");
  auto states = require(m, "states", p).get<std::vector<std::string>>();
  auto signals = require(m, "signals", p).get<std::vector<std::string>>();
  const auto& rows = require(m, "joint", p);
  if (!rows.is_array()) throw Error(ErrorCode::ParseError, "joint must be an array of rows", join_path(p, "joint"));
  std::vector<std::vector<T>> joint;
  for (std::size_t i = 0; i < rows.size(); ++i)
    joint.push_back(scalars_from_json<T>(rows[i], join_path(p, "joint[" + std::to_string(i) + "]")));
  try {
    return SubjectiveModel<T>(std::move(states), std::move(signals), std::move(joint));
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, e.message(), p);
  }
}

// ---------------------------------------------------------------------------
// Instances

namespace detail {

template <class T>
FiniteInstance<T> finite_instance_from_json(const Json& j, const std::vector<std::string>& states) {
  auto prior = finite_from_json<T>(require(j, "prior", ""), states, "prior");
  const auto& ej = require(j, "ensemble", "");
  std::string kind = require(ej, "kind", "ensemble").get<std::string>();
  if (kind != "finite")
    throw Error(ErrorCode::ValidationError, "a finite state space needs a finite ensemble", "ensemble.kind");
  auto ens = ensemble_from_json<T>(ej, states, "ensemble");
  std::optional<TrueSignalModel<T>> ts;
  if (j.contains("true_signals") && !j.at("true_signals").is_null())
    ts = true_signals_from_json<T>(j.at("true_signals"), "true_signals");
  return FiniteInstance<T>{std::move(prior), std::move(ens), std::move(ts)};
}

}  // namespace detail

inline ProblemInstance parse_instance(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "instance must be a JSON object");
  if (j.contains("schema_version")) {
    const auto& v = j.at("schema_version");
    if (!(v.is_string() && v.get<std::string>() == kSchemaVersion))
      throw Error(ErrorCode::ValidationError, "unsupported schema version", "schema_version");
  }
  try {
    ProblemInstance inst;
    const auto& ss = require(j, "state_space", "");
    std::string kind = require(ss, "kind", "state_space").get<std::string>();
    if (j.contains("description")) inst.description = j.at("description").get<std::string>();
    if (j.contains("signal_noise"))
      inst.signal_noise = real_from_json(require(j.at("signal_noise"), "variance", "signal_noise"), "signal_noise.variance");
    if (j.contains("model")) inst.model = j.at("model");
    if (kind == "finite") {
      inst.mode = j.contains("mode") ? parse_mode(j.at("mode").get<std::string>()) : Mode::Rational;
      auto labels = require(ss, "labels", "state_space").get<std::vector<std::string>>();
      if (labels.empty()) throw Error(ErrorCode::ValidationError, "state space has no labels", "state_space.labels");
      if (inst.mode == Mode::Rational) {
        inst.body = detail::finite_instance_from_json<Rational>(j, labels);
      } else {
        inst.body = detail::finite_instance_from_json<double>(j, labels);
      }
      return inst;
    }
    if (kind != "real_line") throw Error(ErrorCode::ValidationError, "unknown state space kind '" + kind + "'", "state_space.kind");
    inst.mode = j.contains("mode") ? parse_mode(j.at("mode").get<std::string>()) : Mode::Float;
    const auto& pj = require(j, "prior", "");
    if (!pj.contains("kind") || pj.at("kind") != "parametric")
      throw Error(ErrorCode::ValidationError, "a real-line prior must be parametric", "prior.kind");
    ContinuousInstance c{parametric_from_json(pj, "prior"), PointMassFamily{ParametricDistribution::point_mass(0)}};
    const auto& ej = require(j, "ensemble", "");
    std::string ek = require(ej, "kind", "ensemble").get<std::string>();
    if (ek == "point_mass_family") {
      c.ensemble = PointMassFamily{parametric_from_json(require(ej, "location_law", "ensemble"), "ensemble.location_law")};
    } else if (ek == "finite") {
      c.ensemble = ensemble_from_json<double>(ej, std::nullopt, "ensemble");
    } else {
      throw Error(ErrorCode::ValidationError, "unknown ensemble kind '" + ek + "'", "ensemble.kind");
    }
    if (j.contains("true_signals"))
      throw Error(ErrorCode::ValidationError, "true signals are only supported on finite state spaces", "true_signals");
    inst.body = std::move(c);
    return inst;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline Json to_json(const ProblemInstance& inst) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["mode"] = to_string(inst.mode);
  if (inst.description) j["description"] = *inst.description;
  if (inst.signal_noise) j["signal_noise"] = {{"variance", *inst.signal_noise}};
  if (inst.model) j["model"] = *inst.model;
  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, std::monostate>) {
          throw Error(ErrorCode::InvalidArgument, "instance has no body");
        } else if constexpr (std::is_same_v<B, ContinuousInstance>) {
          j["state_space"] = {{"kind", "real_line"}};
          j["prior"] = to_json(b.prior);
          if (const auto* f = std::get_if<PointMassFamily>(&b.ensemble)) {
            j["ensemble"] = {{"kind", "point_mass_family"}, {"location_law", to_json(f->location_law)}};
          } else {
            j["ensemble"] = to_json(std::get<FiniteEnsemble<double>>(b.ensemble));
          }
        } else {
          j["state_space"] = {{"kind", "finite"}, {"labels", b.states()}};
          j["prior"] = to_json(b.prior);
          j["ensemble"] = to_json(b.ensemble);
          if (b.true_signals) j["true_signals"] = to_json(*b.true_signals);
        }
      },
      inst.body);
  return j;
}

inline std::string serialize_instance(const ProblemInstance& inst) { return canonical_dump(to_json(inst)); }

inline Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemInstance load_instance(const std::string& path) { return parse_instance(parse_json_text(read_file(path), path)); }

}  // namespace mispec::io
