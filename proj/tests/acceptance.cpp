// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mispec/io/io.hpp"
#include "oracles.hpp"

using namespace mispec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Failed {
  std::string why;
};

void need(bool cond, const std::string& why) {
  if (!cond) throw Failed{why};
}

std::string data(const std::string& name) { return std::string(MISPEC_DATA_DIR) + "/" + name; }

Rational q(const char* s) { return parse_rational(s); }

FiniteDistribution<Rational> hl(const char* h, const char* l) { return FiniteDistribution<Rational>({"H", "L"}, {q(h), q(l)}); }

FiniteDistribution<Rational> two_state_prior() { return hl("1/2", "1/2"); }

FiniteEnsemble<Rational> two_state_ensemble() {
  return FiniteEnsemble<Rational>({{hl("4/5", "1/5"), q("1/4"), "0.8"}, {hl("1", "0"), q("3/4"), "1.0"}});
}

io::Json run_ok(const std::string& cmd, const std::string& file, const io::RunOptions& opt = {}) {
  auto res = io::run(cmd, data(file), opt);
  need(res.exit_code == 0, cmd + " exited " + std::to_string(res.exit_code) + ": " + res.err);
  return io::Json::parse(res.out).at("result");
}

/// Random finite ensemble with pairwise-distinct posteriors; nullopt on a collision.
std::optional<FiniteEnsemble<Rational>> random_ensemble(oracle::Gen& g, int d, int n, int post_den, int weight_den) {
  auto labels = default_state_labels(static_cast<std::size_t>(d));
  auto w = g.simplex(n, weight_den, true);
  std::vector<EnsembleEntry<Rational>> entries;
  for (int i = 0; i < n; ++i)
    entries.push_back({FiniteDistribution<Rational>(labels, g.simplex(d, post_den, false)), w[i], "m" + std::to_string(i)});
  try {
    return FiniteEnsemble<Rational>(std::move(entries));
  } catch (const Error&) {
    return std::nullopt;
  }
}

// 1
Outcome published_table() {
  io::RunOptions opt;
  opt.model_path = data("two_state_table.json");
  auto j = run_ok("verify", "two_state.json", opt);
  need(j.at("condition_a") && j.at("condition_b") && j.at("condition_c"), "verify reported a failed condition");
  need(j.at("x_marginal") == io::Json({"1/2", "1/2"}), "Q_X = " + j.at("x_marginal").dump());
  need(j.at("pushforward") == io::Json({"1/4", "3/4"}), "pushforward = " + j.at("pushforward").dump());

  auto model = io::model_from_json<Rational>(io::detail::load_json_file(data("two_state_table.json")), "");
  auto qs = model.s_marginal();
  need(qs[0] > 0 && qs[1] > 0, "Q_S vanishes on a true signal");
  need(model.kernel(0)->probs() == hl("4/5", "1/5").probs(), "nu(0.8) differs");
  need(model.kernel(1)->probs() == hl("1", "0").probs(), "nu(1.0) differs");
  return {true, "conditions (a)(b)(c) exact; Q_S = (" + format_rational(qs[0]) + ", " + format_rational(qs[1]) + ", " +
                    format_rational(qs[2]) + ")"};
}

// 2
Outcome construction() {
  auto j = run_ok("rationalize", "two_state.json");
  need(j.at("outcome") == "Consistent", "rationalize did not return a model");
  const auto& cert = j.at("certificates").at(0);
  need(cert.at("epsilon") == "10/19", "epsilon = " + cert.at("epsilon").dump());
  need(j.at("ominus_mass") == "9/19", "Q_S(ominus) = " + j.at("ominus_mass").dump());
  need(j.at("ominus_posterior").at("probs") == io::Json({"0", "1"}), "nu(ominus) = " + j.at("ominus_posterior").dump());

  // Round-trip through verify, and recompute epsilon from the density ratio.
  auto tmp = std::string(MISPEC_BUILD_DIR) + "/acceptance_model.json";
  io::detail::write_file(tmp, io::canonical_dump({{"result", j}}));
  io::RunOptions v;
  v.model_path = tmp;
  need(run_ok("verify", "two_state.json", v).at("ok").get<bool>(), "verify rejected the constructed model");
  std::remove(tmp.c_str());

  auto avg = average_finite_posterior(two_state_ensemble());
  Rational c = 0;
  for (std::size_t x = 0; x < 2; ++x) c = std::max(c, Rational(avg[x] / two_state_prior()[x]));
  need(Rational(1 / c) == q("10/19"), "independent 1/max(q/p) = " + format_rational(Rational(1 / c)));
  return {true, "epsilon 10/19, Q_S(ominus) 9/19, nu(ominus) (0,1); model verifies"};
}

// 3
Outcome no_ominus() {
  auto prior = two_state_prior();
  auto ens = two_state_ensemble();
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  GridSearchStats stats;
  auto m = exhaustive_model_search(prior, ens, ts, 20, {false, true}, &stats);
  need(!m.has_value(), "found a model without the subjective-only signal");
  auto loose = exhaustive_model_search(prior, ens, ts, 20, {false, false});
  need(!loose.has_value(), "found a model without ominus when Q_S is free");
  auto with = exhaustive_model_search(prior, ens, ts, 20, {true, false});
  need(with.has_value(), "control search with ominus found nothing");
  return {true, "no table at g = 20 (" + std::to_string(stats.column_candidates) + " candidate columns); control with ominus succeeds"};
}

// 4
Outcome tail_rejection() {
  auto j = run_ok("check", "heavy_tails.json");
  need(j.at("outcome") == "Inconsistent", "outcome " + j.at("outcome").dump());
  const auto& w = j.at("witness");
  need(w.at("kind") == "TailViolation", "witness " + w.at("kind").dump());
  need(w.at("flagged").size() == 2, "flagged " + std::to_string(w.at("flagged").size()) + " posteriors");
  for (const auto& f : w.at("flagged")) need(f.at("verdict").at("relation") == "QHeavier", "relation " + f.dump());
  return {true, "TailViolation with both posteriors QHeavier"};
}

// 5
Outcome partition_certificate() {
  io::RunOptions opt;
  opt.width = 1;
  auto j = run_ok("partition", "point_masses.json", opt);
  need(j.at("outcome") == "Consistent", "outcome " + j.at("outcome").dump());

  auto inst = io::load_instance(data("point_masses.json"));
  const auto& ci = std::get<io::ContinuousInstance>(inst.body);
  const auto& fam = std::get<PointMassFamily>(ci.ensemble);
  auto v = partition_prover(ci.prior, fam, 1.0);
  const auto& ok = std::get<Consistent<double>>(v);
  std::size_t inner = 0, analytic = 0, k = 0;
  double worst = 0;
  for (const auto& cell : ok.cells) {
    if (cell.analytic) {
      ++analytic;
      continue;
    }
    need(k < ok.certificates.size(), "cell without certificate");
    auto avg = cell_average_posterior(fam, cell.interval->lo, cell.interval->hi);
    auto rep = verify_certificate(ci.prior, avg, ok.certificates[k++]);
    need(rep.ok(), "certificate on [" + std::to_string(cell.interval->lo) + "," + std::to_string(cell.interval->hi) + ") fails");
    worst = std::max(worst, rep.max_identity_error);
    ++inner;
  }
  need(worst <= 1e-6, "identity error " + std::to_string(worst));
  need(analytic == 2, "expected two analytic tail regions, got " + std::to_string(analytic));
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu verified cells (max identity error %.2e), %zu analytic tails", inner, worst, analytic);
  return {true, buf};
}

// 6
Outcome full_support_suite() {
  oracle::Gen g(6);
  int done = 0;
  while (done < 10000) {
    int d = g.integer(2, 6), n = g.integer(1, 8);
    auto ens = random_ensemble(g, d, n, g.integer(2, 9), 3 * n);
    if (!ens) continue;
    FiniteDistribution<Rational> prior(default_state_labels(static_cast<std::size_t>(d)), g.simplex(d, g.integer(d, 3 * d), true));
    auto verdict = check_finite_support(prior, *ens);
    need(is_consistent(verdict), "instance " + std::to_string(done) + " not Consistent");
    auto ts = TrueSignalModel<Rational>::from_ensemble(*ens);
    auto built = construct_subjective_model(prior, *ens, ts);
    need(verify_model(built.model, prior, *ens, ts).ok(), "instance " + std::to_string(done) + " model fails verify");
    ++done;
  }
  return {true, "10000 full-support instances consistent; all models verify exactly"};
}

// 7
Outcome oracle_agreement() {
  oracle::Gen g(7);
  int done = 0, consistent = 0;
  while (done < 200) {
    int d = g.integer(2, 3), n = g.integer(1, 3);
    auto ens = random_ensemble(g, d, n, 4, 8);
    if (!ens) continue;
    FiniteDistribution<Rational> prior(default_state_labels(static_cast<std::size_t>(d)), g.simplex(d, 4, false));
    auto ts = TrueSignalModel<Rational>::from_ensemble(*ens);
    bool c = is_consistent(check_finite_support(prior, *ens));
    bool found = exhaustive_model_search(prior, *ens, ts, 16).has_value();
    need(c == found, "disagreement on instance " + std::to_string(done));
    consistent += c;
    ++done;
  }
  need(consistent > 0 && consistent < 200, "sample is not mixed");
  return {true, "200 instances agree (" + std::to_string(consistent) + " consistent, " + std::to_string(200 - consistent) +
                    " inconsistent)"};
}

// 8
Outcome notion_ladder() {
  oracle::Gen g(8);
  int done = 0, bp = 0, sy = 0, mb = 0;
  while (done < 10000) {
    int d = g.integer(2, 4), n = g.integer(1, 4);
    auto ens = random_ensemble(g, d, n, g.integer(2, 6), 2 * n);
    if (!ens) continue;
    auto labels = default_state_labels(static_cast<std::size_t>(d));
    // Mix in priors equal to the average posterior so every rung is exercised.
    FiniteDistribution<Rational> prior =
        g.coin(0.3) ? average_finite_posterior(*ens) : FiniteDistribution<Rational>(labels, g.simplex(d, 6, false));
    NotionLadder l;
    try {
      l = classify(prior, *ens);
    } catch (const Error& e) {
      throw Failed{std::string("instance ") + std::to_string(done) + ": " + e.what()};
    }
    need(!l.bayes_plausible || l.shmaya_yariv, "BP without SY");
    need(!l.shmaya_yariv || l.misspecified_bayesian, "SY without MB");
    bp += l.bayes_plausible;
    sy += l.shmaya_yariv;
    mb += l.misspecified_bayesian;
    ++done;
  }
  auto l = classify(two_state_prior(), two_state_ensemble());
  need(l == NotionLadder{false, false, true}, "two-state ladder differs");
  return {true, "0 violations in 10000 (BP " + std::to_string(bp) + ", SY " + std::to_string(sy) + ", MB " + std::to_string(mb) +
                    "); two-state ladder (false,false,true)"};
}

// 9
Outcome diagnostic_equivalence() {
  auto grid = signal_grid(-5, 5, 0.1);
  need(grid.size() == 101, "grid has " + std::to_string(grid.size()) + " points");
  double worst_mean = 0, worst_var = 0;
  int cases = 0;
  for (double theta : {0.0, 0.5, 1.0, 2.0, 5.0})
    for (double mean : {0.0, 1.0})
      for (double var : {0.5, 1.0, 2.0})
        for (double nv : {0.5, 1.0, 2.0}) {
          GaussianPrior prior{mean, var};
          SignalNoise noise{nv};
          std::vector<Centering> modes{Centering::Centered};
          if (mean == 0) modes.push_back(Centering::Literal);
          for (auto c : modes) {
            auto rep = equivalence_report(prior, noise, theta, c, grid);
            worst_mean = std::max(worst_mean, rep.max_mean_deviation);
            worst_var = std::max(worst_var, rep.max_variance_deviation);
            need(rep.variance_identity_exact, "variance identity fails at theta " + std::to_string(theta));
            // Independent exact check of (1 - K) sigma^2.
            Rational s2 = rational_from_double(var), e2 = rational_from_double(nv);
            Rational expect = (1 - s2 / (s2 + e2)) * s2;
            for (double s : grid)
              need(misspecified_posterior_exact(prior, noise, theta, c, s).variance == expect, "exact variance differs");
            ++cases;
          }
        }
  need(worst_mean < 1e-12, "mean deviation " + std::to_string(worst_mean));
  need(worst_var < 1e-12, "variance deviation " + std::to_string(worst_var));
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d configurations: max |dmean| %.1e, max |dvar| %.1e, variance (1-K)s2 exact", cases,
                worst_mean, worst_var);
  return {true, buf};
}

// 10
Outcome monte_carlo() {
  io::RunOptions opt;
  opt.draws = 100000;
  auto j = run_ok("simulate", "two_state.json", opt);
  const auto& law = j.at("law");
  need(law.size() == 2, "expected two posteriors");
  double sd = std::sqrt(0.25 * 0.75 / 1e5);
  double f0 = law[0].at("frequency"), f1 = law[1].at("frequency");
  need(std::fabs(f0 - 0.25) <= 4 * sd, "frequency " + std::to_string(f0));
  need(std::fabs(f1 - 0.75) <= 4 * sd, "frequency " + std::to_string(f1));
  char buf[120];
  std::snprintf(buf, sizeof buf, "frequencies (%.5f, %.5f), %.2f sigma", f0, f1, std::fabs(f0 - 0.25) / sd);
  return {true, buf};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> body;
  };
  std::vector<Criterion> all{
      {"1 published table verifies exactly", 1, published_table},
      {"2 construction epsilon 10/19", 1, construction},
      {"3 no model without ominus at g=20", 30, no_ominus},
      {"4 heavier tails rejected", 1, tail_rejection},
      {"5 partition certificates", 10, partition_certificate},
      {"6 full-support instances consistent", 60, full_support_suite},
      {"7 grid oracle agreement", 600, oracle_agreement},
      {"8 notion ladder", 60, notion_ladder},
      {"9 diagnostic equivalence", 5, diagnostic_equivalence},
      {"10 Monte Carlo pushforward", 5, monte_carlo},
  };
  int failures = 0;
  for (const auto& c : all) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const Failed& f) {
      o = {false, f.why};
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > c.limit_s) {
      o.pass = false;
      o.detail += " (too slow)";
    }
    failures += !o.pass;
    std::printf("%s  criterion %-40s %8.3fs / %gs  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, c.limit_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures == 0 ? 0 : 1;
}
