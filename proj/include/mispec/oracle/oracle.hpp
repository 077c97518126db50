#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mispec/core/error.hpp"
#include "mispec/measures/ensemble.hpp"
#include "mispec/rationalizer/model.hpp"

namespace mispec {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

struct GridSearchOptions {
  /// Allow mass on the subjective-only signal.
  bool allow_ominus = true;
  /// Pin each true-signal column total to g times its true probability.
  bool qs_equals_p = false;
};

struct GridSearchStats {
  std::size_t column_candidates = 0;
  std::size_t tables_verified = 0;
};

namespace detail {

/// All vectors of n nonnegative integers summing to total.
inline void compositions(int total, std::size_t n, std::vector<int>& cur, const std::function<void()>& visit) {
  if (cur.size() + 1 == n) {
    cur.push_back(total);
    visit();
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(total - k, n, cur, visit);
    cur.pop_back();
  }
}

inline Rational frac(long a, long b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

inline bool grid_close(const Rational& a, const Rational& b, const Rational& tol) {
  if ((a == 0) != (b == 0)) return false;
  return Rational(abs(a - b)) <= tol;
}

}  // namespace detail

/// Brute-force search for a subjective model whose joint table lies on the
/// grid of multiples of 1/g and passes verify_model with tolerance 2/g and
/// zero-pattern matching.
///
/// True-signal columns are restricted to those whose conditional is close to
/// a posterior; the subjective-only column is then fitted against the prior.
inline std::optional<SubjectiveModel<Rational>> exhaustive_model_search(
    const FiniteDistribution<Rational>& prior, const FiniteEnsemble<Rational>& ensemble,
    const TrueSignalModel<Rational>& true_signals, int g, const GridSearchOptions& opt = {},
    GridSearchStats* stats = nullptr) {
  const std::size_t n = prior.size(), m = true_signals.size();
  if (n > 3 || ensemble.size() > 3 || m > 3)
    throw Error(ErrorCode::SearchSpaceTooLarge, "grid search handles at most 3 states, 3 posteriors and 3 signals");
  if (g < 4 || g > 20) throw Error(ErrorCode::SearchSpaceTooLarge, "grid resolution must be between 4 and 20");
  if (!ensemble.is_finite()) throw Error(ErrorCode::MixedRepresentation, "grid search needs finite posteriors");
  for (std::size_t i = 0; i < ensemble.size(); ++i) require_same_states(prior, ensemble.finite_posterior(i));

  const Rational tol = detail::frac(2, g);
  const Rational gq(g);
  VerifyOptions<Rational> vopt{tol, true};

  // Candidate integer columns for each true signal.
  std::vector<std::vector<std::vector<int>>> cands(m);
  for (std::size_t s = 0; s < m; ++s) {
    const auto& label = true_signals.signals()[s];
    std::vector<std::size_t> targets;
    if (auto e = ensemble.index_of_label(label)) {
      targets.push_back(*e);
    } else {
      for (std::size_t e = 0; e < ensemble.size(); ++e) targets.push_back(e);
    }
    bool needed = true_signals.probs()[s] > 0;
    std::optional<int> pinned;
    if (opt.qs_equals_p) {
      Rational t = true_signals.probs()[s] * gq;
      if (t.get_den() != 1) return std::nullopt;  // true law is off the grid
      pinned = static_cast<int>(t.get_num().get_si());
    }
    for (int total = 0; total <= g; ++total) {
      if (pinned && total != *pinned) continue;
      if (total == 0) {
        if (!needed) cands[s].push_back(std::vector<int>(n, 0));
        continue;
      }
      std::vector<int> cur;
      detail::compositions(total, n, cur, [&] {
        for (auto e : targets) {
          const auto& mu = ensemble.finite_posterior(e);
          bool ok = true;
          for (std::size_t x = 0; x < n && ok; ++x) ok = detail::grid_close(detail::frac(cur[x], total), mu[x], tol);
          if (ok) {
            cands[s].push_back(cur);
            return;
          }
        }
      });
    }
    if (stats) stats->column_candidates += cands[s].size();
    if (cands[s].empty()) return std::nullopt;
  }

  std::vector<Rational> prior_units;
  for (std::size_t x = 0; x < n; ++x) prior_units.push_back(prior[x] * gq);
  const Rational slack = tol * gq;

  std::optional<SubjectiveModel<Rational>> found;
  std::vector<int> col_sum(n, 0);
  std::vector<std::size_t> pick(m, 0);

  auto build = [&](const std::vector<int>& ominus) {
    std::vector<std::string> signals = true_signals.signals();
    signals.push_back(kOminus);
    std::vector<std::vector<Rational>> joint(n, std::vector<Rational>(m + 1));
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t s = 0; s < m; ++s) joint[x][s] = detail::frac(cands[s][pick[s]][x], g);
      joint[x][m] = detail::frac(ominus[x], g);
    }
    return SubjectiveModel<Rational>(prior.states(), std::move(signals), std::move(joint));
  };

  auto try_ominus = [&](int used) {
    int rest = g - used;
    if (!opt.allow_ominus && rest != 0) return;
    std::vector<int> cur;
    detail::compositions(rest, n, cur, [&] {
      if (found) return;
      for (std::size_t x = 0; x < n; ++x)
        if (!detail::grid_close(Rational(col_sum[x] + cur[x]), prior_units[x], slack)) return;
      auto model = build(cur);
      if (stats) ++stats->tables_verified;
      if (verify_model(model, prior, ensemble, true_signals, vopt).ok()) found = std::move(model);
    });
  };

  std::function<void(std::size_t, int)> dfs = [&](std::size_t s, int used) {
    if (found) return;
    if (s == m) {
      try_ominus(used);
      return;
    }
    for (std::size_t k = 0; k < cands[s].size() && !found; ++k) {
      const auto& c = cands[s][k];
      int t = 0;
      for (int v : c) t += v;
      if (used + t > g) continue;
      bool fits = true;
      for (std::size_t x = 0; x < n; ++x) fits = fits && Rational(col_sum[x] + c[x]) <= prior_units[x] + slack;
      if (!fits) continue;
      pick[s] = k;
      for (std::size_t x = 0; x < n; ++x) col_sum[x] += c[x];
      dfs(s + 1, used + t);
      for (std::size_t x = 0; x < n; ++x) col_sum[x] -= c[x];
    }
  };
  dfs(0, 0);
  return found;
}

/// One realized posterior with its empirical frequency.
struct EmpiricalPosterior {
  FiniteDistribution<double> posterior;
  std::size_t count = 0;
  double frequency = 0.0;
  /// Binomial standard error of the frequency.
  double std_error = 0.0;
};

/// 53-bit uniform on [0, 1), stable across standard library implementations.
inline double uniform53(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Draws signals from the true law, maps each through the model's kernel and
/// tallies the resulting posteriors, merging those within 1e-9.
template <class T>
std::vector<EmpiricalPosterior> monte_carlo_posterior_law(const SubjectiveModel<T>& model,
                                                          const TrueSignalModel<T>& true_signals, std::size_t draws,
                                                          std::uint64_t seed = kDefaultSeed) {
  if (draws == 0) throw Error(ErrorCode::InvalidArgument, "need at least one draw");
  const std::size_t m = true_signals.size();
  std::vector<double> cdf;
  double acc = 0;
  for (const auto& p : true_signals.probs()) cdf.push_back(acc += to_double(p));
  std::vector<FiniteDistribution<double>> nu;
  for (std::size_t s = 0; s < m; ++s) {
    const auto& label = true_signals.signals()[s];
    auto j = model.signal_index(label);
    if (!j) throw Error(ErrorCode::ValidationError, "true signal '" + label + "' missing from model");
    auto k = model.kernel(*j);
    if (!k) {
      if (to_double(true_signals.probs()[s]) > 0)
        throw Error(ErrorCode::ValidationError, "posterior at signal '" + label + "' is undefined");
      nu.push_back(FiniteDistribution<double>::normalized(model.states(), std::vector<double>(model.num_states(), 1.0)));
    } else {
      nu.push_back(k->template cast<double>());
    }
  }
  // Group signals whose posteriors coincide.
  std::vector<std::size_t> group(m);
  std::vector<EmpiricalPosterior> out;
  for (std::size_t s = 0; s < m; ++s) {
    std::optional<std::size_t> hit;
    for (std::size_t k = 0; k < out.size() && !hit; ++k) {
      bool same = true;
      for (std::size_t x = 0; x < nu[s].size(); ++x) same = same && std::fabs(nu[s][x] - out[k].posterior[x]) <= 1e-9;
      if (same) hit = k;
    }
    if (!hit) {
      hit = out.size();
      out.push_back({nu[s], 0, 0.0, 0.0});
    }
    group[s] = *hit;
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    double u = uniform53(rng) * acc;
    std::size_t s = 0;
    while (s + 1 < m && !(u < cdf[s])) ++s;
    ++counts[s];
  }
  for (std::size_t s = 0; s < m; ++s) out[group[s]].count += counts[s];
  for (auto& e : out) {
    e.frequency = static_cast<double>(e.count) / static_cast<double>(draws);
    e.std_error = std::sqrt(e.frequency * (1 - e.frequency) / static_cast<double>(draws));
  }
  return out;
}

}  // namespace mispec
