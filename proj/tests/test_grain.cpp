#include <gtest/gtest.h>

#include <cmath>

#include "mispec/grain/grain.hpp"
#include "oracles.hpp"

using namespace mispec;

namespace {

Rational q(const char* s) { return parse_rational(s); }

FiniteDistribution<Rational> fd(std::vector<Rational> v) {
  auto labels = default_state_labels(v.size());
  return FiniteDistribution<Rational>(std::move(labels), std::move(v));
}

const auto kStd = ParametricDistribution::normal(0, 1);

}  // namespace

TEST(GrainFinite, UniformPriorAverageOfTwoPosteriors) {
  auto p = fd({q("1/2"), q("1/2")});
  auto qq = fd({q("19/20"), q("1/20")});
  auto r = grain_decompose_finite(p, qq);
  ASSERT_TRUE(has_grain(r));
  const auto& cert = std::get<GrainCertificate<Rational>>(r);
  // c is the largest likelihood ratio on the support of p.
  Rational c_ref = std::max(Rational(qq[0] / p[0]), Rational(qq[1] / p[1]));
  EXPECT_EQ(cert.c, c_ref);
  EXPECT_EQ(cert.c, q("19/10"));
  EXPECT_EQ(cert.epsilon, q("10/19"));
  const auto& res = std::get<FiniteDistribution<Rational>>(cert.residual);
  EXPECT_EQ(res[0], 0);
  EXPECT_EQ(res[1], 1);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(p[i], cert.epsilon * qq[i] + (1 - cert.epsilon) * res[i]);
  EXPECT_TRUE(verify_certificate(p, qq, cert).ok());
}

TEST(GrainFinite, IdenticalLawsGiveArbitraryResidual) {
  auto p = fd({q("1/2"), q("1/2")});
  auto r = grain_decompose_finite(p, p);
  const auto& cert = std::get<GrainCertificate<Rational>>(r);
  EXPECT_EQ(cert.epsilon, 1);
  EXPECT_TRUE(cert.arbitrary_residual());
  EXPECT_TRUE(verify_certificate(p, p, cert).ok());
}

TEST(GrainFinite, SupportViolationNamesState) {
  auto r = grain_decompose_finite(fd({0, 1}), fd({1, 0}));
  ASSERT_FALSE(has_grain(r));
  const auto& ng = std::get<NoGrain>(r);
  EXPECT_EQ(ng.reason, NoGrain::Reason::SupportViolation);
  EXPECT_EQ(ng.witness_state, "x1");
}

TEST(GrainFinite, StateMismatch) {
  FiniteDistribution<Rational> a({"H", "L"}, {q("1/2"), q("1/2")});
  FiniteDistribution<Rational> b({"A", "B"}, {q("1/2"), q("1/2")});
  try {
    grain_decompose_finite(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StateMismatch);
  }
}

TEST(GrainFinite, OversizedEpsilonFails) {
  auto p = fd({q("1/2"), q("1/2")});
  auto qq = fd({q("19/20"), q("1/20")});
  GrainCertificate<Rational> bad{q("9/10"), q("10/9"), fd({0, 1})};
  auto rep = verify_certificate(p, qq, bad);
  EXPECT_FALSE(rep.ok());
  EXPECT_FALSE(rep.residual_nonnegative);
}

TEST(GrainFinite, ProposalEquivalenceProperty) {
  // Ratio bound finite <=> decomposition succeeds <=> its certificate verifies.
  oracle::Gen g(21);
  for (int t = 0; t < 3000; ++t) {
    int n = g.integer(1, 8);
    auto p = fd(g.simplex(n, 24, false));
    auto qq = fd(g.simplex(n, 24, false));
    bool ratio_finite = true;
    for (int i = 0; i < n; ++i)
      if (p[i] == 0 && qq[i] > 0) ratio_finite = false;
    auto r = grain_decompose_finite(p, qq);
    ASSERT_EQ(has_grain(r), ratio_finite);
    if (ratio_finite) {
      ASSERT_TRUE(verify_certificate(p, qq, std::get<GrainCertificate<Rational>>(r)).ok());
    }
  }
}

TEST(GrainFinite, MaximalEpsilonAndMonotonicity) {
  oracle::Gen g(5);
  for (int t = 0; t < 1000; ++t) {
    int n = g.integer(2, 6);
    auto p = fd(g.simplex(n, 30, true));
    auto qq = fd(g.simplex(n, 30, false));
    auto cert = std::get<GrainCertificate<Rational>>(grain_decompose_finite(p, qq));
    if (cert.epsilon == 1) continue;
    // Any smaller epsilon also certifies.
    for (Rational f : {q("1/2"), q("9/10"), q("1/1000")}) {
      Rational e = cert.epsilon * f;
      ASSERT_TRUE(verify_certificate(p, qq, certificate_with_epsilon(p, qq, e)).ok());
    }
    // Any larger epsilon breaks nonnegativity on the binding state.
    Rational bigger = cert.epsilon + q("1/1000000000");
    if (bigger > 1) bigger = 1;
    GrainCertificate<Rational> trial{bigger, Rational(1 / bigger), ArbitraryResidual{}};
    auto rep = verify_certificate(p, qq, trial);
    ASSERT_FALSE(rep.ok());
  }
}

TEST(GrainFinite, FloatMode) {
  FiniteDistribution<double> p({"H", "L"}, {0.5, 0.5});
  FiniteDistribution<double> qq({"H", "L"}, {0.95, 0.05});
  auto cert = std::get<GrainCertificate<double>>(grain_decompose_finite(p, qq));
  EXPECT_NEAR(cert.epsilon, 10.0 / 19.0, 1e-15);
  EXPECT_TRUE(verify_certificate(p, qq, cert).ok());
  GrainCertificate<double> bad{0.9, 1 / 0.9, FiniteDistribution<double>({"H", "L"}, {0.0, 1.0})};
  EXPECT_FALSE(verify_certificate(p, qq, bad).ok());
}

TEST(GrainParametric, TruncatedLaplaceInsideNormal) {
  auto t = ParametricDistribution::truncated(ParametricDistribution::laplace(0, 1), 1.0, 2.0);
  auto r = contains_grain_parametric(kStd, t);
  ASSERT_TRUE(has_grain(r));
  const auto& cert = std::get<GrainCertificate<double>>(r);
  EXPECT_TRUE(std::isfinite(cert.c));
  EXPECT_GT(cert.c, 1.0);
  auto rep = verify_certificate(kStd, t, cert);
  EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures[0]);
}

TEST(GrainParametric, LaplaceNotInsideNormal) {
  auto r = contains_grain_parametric(kStd, ParametricDistribution::laplace(0, 1));
  ASSERT_FALSE(has_grain(r));
  const auto& ng = std::get<NoGrain>(r);
  EXPECT_EQ(ng.reason, NoGrain::Reason::UnboundedRatio);
  ASSERT_TRUE(ng.radius);
  EXPECT_GT(*ng.radius, 0.0);
}

TEST(GrainParametric, IdenticalLaplace) {
  auto l = ParametricDistribution::laplace(0, 1);
  auto cert = std::get<GrainCertificate<double>>(contains_grain_parametric(l, l));
  EXPECT_EQ(cert.epsilon, 1.0);
  EXPECT_TRUE(verify_certificate(l, l, cert).ok());
}

TEST(GrainParametric, PointMassHasNoGrain) {
  auto r = contains_grain_parametric(kStd, ParametricDistribution::point_mass(0.3));
  ASSERT_FALSE(has_grain(r));
  EXPECT_EQ(std::get<NoGrain>(r).reason, NoGrain::Reason::SupportViolation);
}

TEST(GrainParametric, OversizedEpsilonFailsOnGrid) {
  auto qq = ParametricDistribution::normal(0.5, 0.5);
  auto cert = std::get<GrainCertificate<double>>(contains_grain_parametric(kStd, qq));
  EXPECT_TRUE(verify_certificate(kStd, qq, cert).ok());
  double e = std::min(1.0, cert.epsilon * 1.01);
  auto bad = certificate_with_epsilon(kStd, qq, e);
  EXPECT_FALSE(verify_certificate(kStd, qq, bad).ok());
  auto small = certificate_with_epsilon(kStd, qq, cert.epsilon * 0.5);
  EXPECT_TRUE(verify_certificate(kStd, qq, small).ok());
}

TEST(GrainParametric, NarrowerGaussiansAlwaysCertify) {
  oracle::Gen g(3);
  for (int t = 0; t < 100; ++t) {
    double m = g.real(-1, 1), v = g.real(0.2, 3), vq = v * g.real(0.05, 0.99), mq = m + g.real(-1, 1);
    auto p = ParametricDistribution::normal(m, v), qq = ParametricDistribution::normal(mq, vq);
    auto r = contains_grain_parametric(p, qq);
    ASSERT_TRUE(has_grain(r));
    auto rep = verify_certificate(p, qq, std::get<GrainCertificate<double>>(r));
    ASSERT_TRUE(rep.ok()) << rep.failures[0];
    ASSERT_NE(tail_order_compare(p, qq).relation, TailVerdict::Relation::QHeavier);
  }
}

TEST(TailOrder, NormalAgainstLaplace) {
  auto v = tail_order_compare(kStd, ParametricDistribution::laplace(0, 1));
  EXPECT_EQ(v.relation, TailVerdict::Relation::QHeavier);
  ASSERT_TRUE(v.witness);
  double r = *v.witness;
  double ratio = std::exp(-r) / std::erfc(r / std::sqrt(2.0));
  EXPECT_NEAR(std::log(ratio), std::log(1e6), 1e-6);
}

TEST(TailOrder, IdenticalNormals) {
  auto v = tail_order_compare(kStd, kStd);
  EXPECT_EQ(v.relation, TailVerdict::Relation::Comparable);
  EXPECT_DOUBLE_EQ(v.c, 1.0);
}

TEST(TailOrder, ExponentialHeavierThanNormal) {
  EXPECT_EQ(tail_order_compare(kStd, ParametricDistribution::exponential(1.0)).relation, TailVerdict::Relation::QHeavier);
  EXPECT_EQ(tail_order_compare(kStd, ParametricDistribution::exponential(1.0, Orientation::Mirrored)).relation,
            TailVerdict::Relation::QHeavier);
}

TEST(TailOrder, LighterAndCompact) {
  EXPECT_EQ(tail_order_compare(ParametricDistribution::laplace(0, 1), kStd).relation, TailVerdict::Relation::PHeavier);
  auto v = tail_order_compare(kStd, ParametricDistribution::uniform(-1, 1));
  EXPECT_EQ(v.relation, TailVerdict::Relation::Comparable);
  EXPECT_GE(v.c, 1.0);
  for (double r = 0; r < 1.0; r += 0.01)
    EXPECT_LE(tail_probability(ParametricDistribution::uniform(-1, 1), r), v.c * tail_probability(kStd, r) * (1 + 1e-12));
}

TEST(TailOrder, HeavierImpliesNoGrain) {
  std::vector<ParametricDistribution> laws = {kStd,
                                              ParametricDistribution::normal(1, 2),
                                              ParametricDistribution::laplace(0, 1),
                                              ParametricDistribution::laplace(1, 3),
                                              ParametricDistribution::exponential(1),
                                              ParametricDistribution::exponential(0.5, Orientation::Mirrored),
                                              ParametricDistribution::uniform(-1, 2)};
  for (const auto& p : laws)
    for (const auto& qq : laws)
      if (tail_order_compare(p, qq).relation == TailVerdict::Relation::QHeavier) {
        EXPECT_FALSE(has_grain(contains_grain_parametric(p, qq))) << p.describe() << " " << qq.describe();
      }
}
