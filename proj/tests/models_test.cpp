#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "heavytail/ks.hpp"
#include "heavytail/models.hpp"
#include "oracles.hpp"

using namespace heavytail;

TEST(ParetoCdf, ClosedFormPoints) {
  const auto m = DistributionModel::pareto(2.0, 1.0);
  EXPECT_EQ(pareto_cdf(m, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(pareto_cdf(m, 2.0), 0.5);
  EXPECT_EQ(pareto_cdf(m, 0.5), 0.0);
}

TEST(ParetoCdf, MatchesHighPrecisionEvaluation) {
  // 1 - (7011/150)^(-0.4462), evaluated at 40 digits.
  const auto m = DistributionModel::pareto(1.4462, 150.0);
  EXPECT_NEAR(pareto_cdf(m, 7011.0), 0.8201191635146051919, 1e-14);
}

TEST(ParetoCdf, MonotoneAndApproachesOne) {
  const auto m = DistributionModel::pareto(1.7, 3.0);
  double previous = 0.0;
  for (double x = 3.0; x < 1e6; x *= 1.1) {
    const double f = pareto_cdf(m, x);
    EXPECT_GE(f, previous);
    previous = f;
  }
  EXPECT_GT(pareto_cdf(m, 1e12), 0.9999);
}

TEST(ParetoQuantile, Examples) {
  EXPECT_EQ(pareto_quantile(DistributionModel::pareto(2.0, 1.0), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(pareto_quantile(DistributionModel::pareto(2.0, 1.0), 0.5), 2.0);
  EXPECT_DOUBLE_EQ(pareto_quantile(DistributionModel::pareto(3.0, 2.0), 0.75), 4.0);
}

TEST(ParetoQuantile, DomainErrors) {
  const auto m = DistributionModel::pareto(2.0, 1.0);
  for (double u : {1.0, 1.5, -0.1}) {
    try {
      pareto_quantile(m, u);
      FAIL() << "u=" << u;
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::Domain);
    }
  }
}

TEST(ParetoQuantile, RoundTripGrid) {
  for (double alpha : {1.1, 1.4462, 2.5, 4.0}) {
    const auto m = DistributionModel::pareto(alpha, 150.0);
    for (int i = 0; i < 1000; ++i) {
      const double u = 0.999 * i / 999.0;
      EXPECT_NEAR(pareto_cdf(m, pareto_quantile(m, u)), u, 1e-12) << alpha << " " << u;
    }
  }
}

TEST(Model, InvariantsEnforced) {
  EXPECT_THROW(DistributionModel::pareto(1.0, 1.0), Error);
  EXPECT_THROW(DistributionModel::pareto(2.0, 0.0), Error);
  EXPECT_THROW(DistributionModel::zipf(0.0, 10), Error);
  EXPECT_NO_THROW(DistributionModel::zipf(1.0, 10));
  EXPECT_THROW(DistributionModel::zipf(1.5, 0), Error);
  EXPECT_EQ(DistributionModel::zipf(1.5, 10).xmin(), 1.0);
  EXPECT_DOUBLE_EQ(DistributionModel::zipf(1.5, 10).beta(), 0.5);
}

TEST(ParetoSample, EmptyAboveCutoffAndDeterministic) {
  const auto m = DistributionModel::pareto(2.5, 3.0);
  RandomStream r0(1);
  EXPECT_TRUE(pareto_sample(m, r0, 0).empty());
  RandomStream a(99), b(99);
  const auto xs = pareto_sample(m, a, 2000);
  EXPECT_EQ(xs, pareto_sample(m, b, 2000));
  for (double x : xs)
    EXPECT_GE(x, 3.0);
}

TEST(ParetoSample, EmpiricalCdfAgreesWithModel) {
  const auto m = DistributionModel::pareto(2.2, 1.0);
  RandomStream rng(2024);
  auto xs = pareto_sample(m, rng, 100000);
  const double d = ks_statistic(xs, m);
  EXPECT_LT(d, 0.01);
}

TEST(Zipf, TwoRankHarmonicCase) {
  const auto m = DistributionModel::zipf(1.0, 2);
  EXPECT_NEAR(zipf_pmf(m, 1), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(zipf_pmf(m, 2), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(zipf_cdf(m, 1), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(zipf_cdf(m, 2), 1.0);
}

TEST(Zipf, PartialSumMatchesHighPrecision) {
  // sum_{k<=50} k^-1.398 / sum_{k<=100} k^-1.398 at 40 digits.
  const auto m = DistributionModel::zipf(1.398, 100);
  EXPECT_NEAR(zipf_cdf(m, 50), 0.95348499467475287296, 1e-13);
}

TEST(Zipf, NormalizationGrid) {
  for (double s : {1.0, 1.14, 1.4, 2.0}) {
    for (std::size_t n : {1u, 10u, 100u, 1000u}) {
      const ZipfTable table(DistributionModel::zipf(s, n));
      double total = 0.0;
      for (std::size_t k = 1; k <= n; ++k)
        total += table.pmf(k);
      EXPECT_NEAR(total, 1.0, 1e-12) << s << " " << n;
      EXPECT_NEAR(table.cdf(n), 1.0, 1e-12);
      for (std::size_t k = 2; k <= n; ++k)
        EXPECT_GE(table.cdf(k), table.cdf(k - 1));
    }
  }
}

TEST(Zipf, RankOutOfRange) {
  const auto m = DistributionModel::zipf(1.5, 5);
  EXPECT_THROW(zipf_pmf(m, 0), Error);
  EXPECT_THROW(zipf_cdf(m, 6), Error);
}

TEST(ZipfSample, Examples) {
  RandomStream rng(5);
  EXPECT_TRUE(zipf_sample(DistributionModel::zipf(1.4, 100), rng, 0).empty());
  EXPECT_EQ(zipf_sample(DistributionModel::zipf(2.0, 1), rng, 5),
            (std::vector<std::size_t>{1, 1, 1, 1, 1}));
}

TEST(ZipfSample, RankOneFrequency) {
  const auto m = DistributionModel::zipf(1.4, 100);
  RandomStream rng(77);
  const auto ranks = zipf_sample(m, rng, 50000);
  const auto ones = std::count(ranks.begin(), ranks.end(), std::size_t{1});
  // P(1) = 1 / H(100, 1.4) = 0.36898808940543453 (40-digit evaluation).
  EXPECT_NEAR(zipf_pmf(m, 1), 0.36898808940543453, 1e-13);
  EXPECT_NEAR(static_cast<double>(ones) / 50000.0, zipf_pmf(m, 1), 0.01);
  for (auto r : ranks) {
    EXPECT_GE(r, 1u);
    EXPECT_LE(r, 100u);
  }
  RandomStream again(77);
  EXPECT_EQ(ranks, zipf_sample(m, again, 50000));
}

TEST(UniformSample, Examples) {
  RandomStream rng(3);
  EXPECT_TRUE(uniform_sample(1.0, 2.0, rng, 0).empty());
  const double eps = 1e-9;
  for (double x : uniform_sample(1.0, 1.0 + eps, rng, 100)) {
    EXPECT_GE(x, 1.0);
    EXPECT_LT(x, 1.0 + eps);
  }
  RandomStream big(11);
  const auto xs = uniform_sample(1.0, 7011.0, big, 10000);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / 10000.0;
  EXPECT_NEAR(mean, 3506.0, 0.02 * 3506.0);
  for (double x : xs) {
    EXPECT_GE(x, 1.0);
    EXPECT_LT(x, 7011.0);
  }
  EXPECT_THROW(uniform_sample(2.0, 2.0, rng, 1), Error);
  RandomStream a(8), b(8);
  EXPECT_EQ(uniform_sample(0.0, 1.0, a, 50), uniform_sample(0.0, 1.0, b, 50));
}

TEST(RandomStream, DerivedStreamsDependOnlyOnKey) {
  auto a = RandomStream::derive(42, {0, 7});
  auto b = RandomStream::derive(42, {0, 7});
  auto c = RandomStream::derive(42, {0, 8});
  auto d = RandomStream::derive(42, {1, 7});
  const auto first = a();
  EXPECT_EQ(first, b());
  EXPECT_NE(first, c());
  EXPECT_NE(first, d());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
