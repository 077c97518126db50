#include <gtest/gtest.h>

#include <algorithm>

#include "instances.hpp"
#include "mispec/alt_notions/alt_notions.hpp"
#include "oracles.hpp"

using namespace mispec;
using fixtures::hl;
using fixtures::r;

namespace {

FiniteDistribution<Rational> vec(std::vector<Rational> v) {
  auto labels = default_state_labels(v.size());
  return FiniteDistribution<Rational>(std::move(labels), std::move(v));
}

std::optional<FiniteEnsemble<Rational>> random_ensemble(oracle::Gen& g, int d, int n, int den) {
  auto w = g.simplex(n, 24, true);
  std::vector<EnsembleEntry<Rational>> entries;
  for (int i = 0; i < n; ++i) entries.push_back({vec(g.simplex(d, den, false)), w[i], "m" + std::to_string(i)});
  try {
    return FiniteEnsemble<Rational>(std::move(entries));
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// Two states: the prior is in the relative interior of the hull of the
/// posteriors' first coordinates iff it is strictly between min and max, or
/// every posterior equals it.
bool sy_oracle_two_states(const FiniteDistribution<Rational>& prior, const FiniteEnsemble<Rational>& ens) {
  Rational lo = ens.finite_posterior(0)[0], hi = lo;
  for (std::size_t i = 1; i < ens.size(); ++i) {
    lo = std::min(lo, Rational(ens.finite_posterior(i)[0]));
    hi = std::max(hi, Rational(ens.finite_posterior(i)[0]));
  }
  if (lo == hi) return prior[0] == lo;
  return lo < prior[0] && prior[0] < hi;
}

FiniteEnsemble<Rational> prior_only() { return FiniteEnsemble<Rational>({{hl("1/2", "1/2"), r("1"), "p"}}); }

}  // namespace

TEST(Simplex, SmallProgramOptimum) {
  // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
  std::vector<Rational> c{1, 1, 0, 0};
  std::vector<std::vector<Rational>> A{{1, 2, 1, 0}, {3, 1, 0, 1}};
  auto res = lp::maximize(c, A, {Rational(4), Rational(6)});
  ASSERT_EQ(res.status, lp::Status::Optimal);
  EXPECT_EQ(res.objective, r("14/5"));
  EXPECT_EQ(res.x[0], r("8/5"));
  EXPECT_EQ(res.x[1], r("6/5"));
}

TEST(Simplex, InfeasibleAndUnbounded) {
  std::vector<std::vector<Rational>> A{{1, 1}, {1, 1}};
  EXPECT_EQ(lp::maximize<Rational>({1, 0}, A, {Rational(1), Rational(2)}).status, lp::Status::Infeasible);
  std::vector<std::vector<Rational>> B{{1, -1}};
  EXPECT_EQ(lp::maximize<Rational>({1, 0}, B, {Rational(1)}).status, lp::Status::Unbounded);
}

TEST(Simplex, RedundantRowsAreDropped) {
  std::vector<std::vector<Rational>> A{{1, 1}, {2, 2}, {1, 0}};
  auto res = lp::maximize<Rational>({0, 1}, A, {Rational(1), Rational(2), r("1/3")});
  ASSERT_EQ(res.status, lp::Status::Optimal);
  EXPECT_EQ(res.x[1], r("2/3"));
}

TEST(BayesPlausibility, Examples) {
  EXPECT_FALSE(bayes_plausibility_test(fixtures::two_state_prior(), fixtures::two_state_ensemble()));
  EXPECT_TRUE(bayes_plausibility_test(fixtures::two_state_prior(), fixtures::symmetric_ensemble()));
  EXPECT_TRUE(bayes_plausibility_test(fixtures::two_state_prior(), prior_only()));
  FiniteDistribution<Rational> other({"A", "B"}, {r("1/2"), r("1/2")});
  EXPECT_THROW(bayes_plausibility_test(other, fixtures::two_state_ensemble()), Error);
}

TEST(ShmayaYariv, TwoStateInstanceInfeasible) {
  auto res = shmaya_yariv_test(fixtures::two_state_prior(), fixtures::two_state_ensemble());
  EXPECT_FALSE(sy_feasible(res));
}

TEST(ShmayaYariv, SymmetricBarycenter) {
  auto prior = fixtures::two_state_prior();
  auto ens = fixtures::symmetric_ensemble();
  auto res = shmaya_yariv_test(prior, ens);
  ASSERT_TRUE(sy_feasible(res));
  const auto& cert = std::get<SYCertificate<Rational>>(res);
  EXPECT_EQ(cert.lambda, (std::vector<Rational>{r("1/2"), r("1/2")}));
  EXPECT_TRUE(verify_sy_certificate(prior, ens, cert));
}

TEST(ShmayaYariv, PriorOnlyGivesUnitWeight) {
  auto res = shmaya_yariv_test(fixtures::two_state_prior(), prior_only());
  ASSERT_TRUE(sy_feasible(res));
  EXPECT_EQ(std::get<SYCertificate<Rational>>(res).lambda, std::vector<Rational>{Rational(1)});
}

TEST(ShmayaYariv, BoundaryIsInfeasible) {
  // Prior equals one of two distinct posteriors: in the hull, not in its relative interior.
  FiniteEnsemble<Rational> ens({{hl("1/2", "1/2"), r("1/2"), "a"}, {hl("1", "0"), r("1/2"), "b"}});
  auto res = shmaya_yariv_test(fixtures::two_state_prior(), ens);
  ASSERT_FALSE(sy_feasible(res));
  ASSERT_TRUE(std::get<SYInfeasible>(res).delta_star.has_value());
  EXPECT_EQ(*std::get<SYInfeasible>(res).delta_star, 0.0);
}

TEST(ShmayaYariv, FloatModeAgreesOnSymmetricInstance) {
  auto prior = fixtures::two_state_prior().cast<double>();
  auto ens = fixtures::symmetric_ensemble().cast<double>();
  auto res = shmaya_yariv_test(prior, ens);
  ASSERT_TRUE(sy_feasible(res));
  const auto& cert = std::get<SYCertificate<double>>(res);
  EXPECT_NEAR(cert.lambda[0], 0.5, 1e-12);
  EXPECT_TRUE(verify_sy_certificate(prior, ens, cert));
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(fixtures::two_state_prior(), fixtures::two_state_ensemble()), (NotionLadder{false, false, true}));
  EXPECT_EQ(classify(fixtures::two_state_prior(), prior_only()), (NotionLadder{true, true, true}));
  FiniteEnsemble<Rational> ens({{hl("1", "0"), r("1"), "x"}});
  EXPECT_EQ(classify(hl("0", "1"), ens), (NotionLadder{false, false, false}));
}

TEST(ShmayaYariv, MatchesIntervalOracleOnTwoStates) {
  oracle::Gen g(101);
  int checked = 0;
  for (int it = 0; it < 2000; ++it) {
    int n = static_cast<int>(g.integer(1, 4));
    auto ens = random_ensemble(g, 2, n, 6);
    if (!ens) continue;
    auto prior = vec(g.simplex(2, 6, false));
    auto res = shmaya_yariv_test(prior, *ens);
    ASSERT_EQ(sy_feasible(res), sy_oracle_two_states(prior, *ens)) << "iteration " << it;
    if (sy_feasible(res)) {
      ASSERT_TRUE(verify_sy_certificate(prior, *ens, std::get<SYCertificate<Rational>>(res)));
    }
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(ShmayaYariv, CertificatesExactAndOrderInvariant) {
  oracle::Gen g(202);
  for (int it = 0; it < 500; ++it) {
    int d = static_cast<int>(g.integer(2, 4)), n = static_cast<int>(g.integer(1, 5));
    auto ens = random_ensemble(g, d, n, 5);
    if (!ens) continue;
    // Half the time use a Bayes-plausible prior so feasible cases are common.
    auto prior = g.coin() ? average_finite_posterior(*ens) : vec(g.simplex(d, 5, false));
    auto res = shmaya_yariv_test(prior, *ens);
    if (sy_feasible(res)) {
      ASSERT_TRUE(verify_sy_certificate(prior, *ens, std::get<SYCertificate<Rational>>(res)));
    }
    auto entries = ens->entries();
    std::reverse(entries.begin(), entries.end());
    FiniteEnsemble<Rational> rev(std::move(entries));
    ASSERT_EQ(sy_feasible(shmaya_yariv_test(prior, rev)), sy_feasible(res)) << "iteration " << it;
  }
}

TEST(Classify, ImplicationChainOnRandomInstances) {
  oracle::Gen g(303);
  int bp = 0, sy = 0, mb = 0, total = 0;
  for (int it = 0; it < 3000; ++it) {
    int d = static_cast<int>(g.integer(2, 4)), n = static_cast<int>(g.integer(1, 4));
    auto ens = random_ensemble(g, d, n, 4);
    if (!ens) continue;
    int mode = static_cast<int>(g.integer(0, 2));
    auto prior = mode == 0 ? average_finite_posterior(*ens) : vec(g.simplex(d, 4, mode == 2));
    NotionLadder l;
    ASSERT_NO_THROW(l = classify(prior, *ens)) << "iteration " << it;
    bp += l.bayes_plausible;
    sy += l.shmaya_yariv;
    mb += l.misspecified_bayesian;
    ++total;
  }
  // Every rung is exercised in both directions.
  EXPECT_GT(bp, 0);
  EXPECT_GT(sy, bp);
  EXPECT_GT(mb, sy);
  EXPECT_LT(mb, total);
}
