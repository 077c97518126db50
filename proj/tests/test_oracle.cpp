#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"
#include "mispec/oracle/oracle.hpp"
#include "mispec/rationalizer/rationalizer.hpp"
#include "oracles.hpp"

using namespace mispec;
using fixtures::hl;
using fixtures::r;

namespace {

FiniteDistribution<Rational> vec(std::vector<Rational> v) {
  auto labels = default_state_labels(v.size());
  return FiniteDistribution<Rational>(std::move(labels), std::move(v));
}

}  // namespace

TEST(GridSearch, FindsModelForTwoStateInstance) {
  auto prior = fixtures::two_state_prior();
  auto ens = fixtures::two_state_ensemble();
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  GridSearchStats stats;
  auto m = exhaustive_model_search(prior, ens, ts, 16, {}, &stats);
  ASSERT_TRUE(m.has_value());
  EXPECT_TRUE(verify_model(*m, prior, ens, ts, {Rational(1, 8), true}).ok());
  EXPECT_GT(stats.tables_verified, 0u);
}

TEST(GridSearch, PublishedTableIsOnTheGrid) {
  // The table's entries are multiples of 1/16, and it passes exactly.
  auto t = fixtures::two_state_table();
  for (const auto& row : t.joint())
    for (const auto& v : row) EXPECT_EQ(Rational(v * 16).get_den(), 1);
}

TEST(GridSearch, NoModelWithoutSubjectiveSignal) {
  auto prior = fixtures::two_state_prior();
  auto ens = fixtures::two_state_ensemble();
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  EXPECT_FALSE(exhaustive_model_search(prior, ens, ts, 20, {false, true}).has_value());
  EXPECT_FALSE(exhaustive_model_search(prior, ens, ts, 20, {false, false}).has_value());
}

TEST(GridSearch, SupportViolationHasNoModel) {
  FiniteEnsemble<Rational> ens({{hl("1", "0"), r("1"), "x"}});
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  for (int g : {4, 8, 16, 20}) EXPECT_FALSE(exhaustive_model_search(hl("0", "1"), ens, ts, g).has_value());
}

TEST(GridSearch, RejectsLargeInstances) {
  auto ens = fixtures::two_state_ensemble();
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  EXPECT_THROW(exhaustive_model_search(fixtures::two_state_prior(), ens, ts, 21), Error);
  EXPECT_THROW(exhaustive_model_search(fixtures::two_state_prior(), ens, ts, 3), Error);
  auto p4 = vec({r("1/4"), r("1/4"), r("1/4"), r("1/4")});
  FiniteEnsemble<Rational> e4({{p4, r("1"), "a"}});
  EXPECT_THROW(exhaustive_model_search(p4, e4, TrueSignalModel<Rational>::from_ensemble(e4), 8), Error);
}

TEST(GridSearch, AgreesWithSupportCheckOnRandomInstances) {
  oracle::Gen g(404);
  int found = 0, missing = 0;
  for (int it = 0; it < 60; ++it) {
    int d = static_cast<int>(g.integer(2, 3)), n = static_cast<int>(g.integer(1, 3));
    auto w = g.simplex(n, 8, true);
    std::vector<EnsembleEntry<Rational>> entries;
    for (int i = 0; i < n; ++i) entries.push_back({vec(g.simplex(d, 4, false)), w[i], "m" + std::to_string(i)});
    std::optional<FiniteEnsemble<Rational>> ens;
    try {
      ens.emplace(std::move(entries));
    } catch (const Error&) {
      continue;
    }
    auto prior = vec(g.simplex(d, 4, false));
    auto ts = TrueSignalModel<Rational>::from_ensemble(*ens);
    bool consistent = is_consistent(check_finite_support(prior, *ens));
    bool has_model = exhaustive_model_search(prior, *ens, ts, 16).has_value();
    ASSERT_EQ(has_model, consistent) << "iteration " << it;
    (has_model ? found : missing)++;
  }
  EXPECT_GT(found, 0);
  EXPECT_GT(missing, 0);
}

TEST(MonteCarlo, ConstructedModelPushforward) {
  auto prior = fixtures::two_state_prior();
  auto ens = fixtures::two_state_ensemble();
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  auto built = construct_subjective_model(prior, ens, ts);
  auto law = monte_carlo_posterior_law(built.model, ts, 100000);
  ASSERT_EQ(law.size(), 2u);
  double sd = std::sqrt(0.25 * 0.75 / 1e5);
  EXPECT_NEAR(law[0].frequency, 0.25, 4 * sd);
  EXPECT_NEAR(law[1].frequency, 0.75, 4 * sd);
  EXPECT_NEAR(law[0].posterior[0], 0.8, 1e-15);
  // Same seed, same tallies.
  EXPECT_EQ(monte_carlo_posterior_law(built.model, ts, 100000)[0].count, law[0].count);
}

TEST(MonteCarlo, DeterministicSignal) {
  FiniteEnsemble<Rational> ens({{hl("1/2", "1/2"), r("1"), "only"}});
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  auto built = construct_subjective_model(fixtures::two_state_prior(), ens, ts);
  auto law = monte_carlo_posterior_law(built.model, ts, 10000);
  ASSERT_EQ(law.size(), 1u);
  EXPECT_EQ(law[0].frequency, 1.0);
}

TEST(MonteCarlo, FourSignalsTwoPosteriors) {
  SubjectiveModel<Rational> m({"H", "L"}, {"a", "b", "c", "d"},
                              {{r("1/10"), r("1/10"), r("3/20"), r("3/20")}, {r("3/20"), r("3/20"), r("1/10"), r("1/10")}});
  TrueSignalModel<Rational> ts({"a", "b", "c", "d"}, {r("1/4"), r("1/4"), r("1/4"), r("1/4")});
  auto law = monte_carlo_posterior_law(m, ts, 100000);
  ASSERT_EQ(law.size(), 2u);
  double sd = std::sqrt(0.25 / 1e5);
  EXPECT_NEAR(law[0].frequency, 0.5, 4 * sd);
  EXPECT_NEAR(law[0].posterior[0], 0.4, 1e-15);
  EXPECT_NEAR(law[1].posterior[0], 0.6, 1e-15);
}

TEST(MonteCarlo, DoublingDrawsStaysWithinSixSigma) {
  auto ens = fixtures::two_state_ensemble();
  auto ts = TrueSignalModel<Rational>::from_ensemble(ens);
  auto built = construct_subjective_model(fixtures::two_state_prior(), ens, ts);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto a = monte_carlo_posterior_law(built.model, ts, 20000, seed);
    auto b = monte_carlo_posterior_law(built.model, ts, 40000, seed + 100);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LE(std::fabs(a[k].frequency - b[k].frequency), 6 * a[k].std_error);
  }
}
