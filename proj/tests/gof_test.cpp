#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "heavytail/gof.hpp"
#include "oracles.hpp"

using namespace heavytail;

namespace {

std::vector<double> pareto_data(double alpha, double xmin, std::size_t n, std::uint64_t seed) {
  auto rng = RandomStream::derive(seed, {99});
  return pareto_sample(DistributionModel::pareto(alpha, xmin), rng, n);
}

Dataset single_year(const std::vector<double> &xs, std::string label = "2015") {
  Dataset ds;
  ds.name = "synthetic";
  YearTable y;
  y.label = std::move(label);
  for (std::size_t i = 0; i < xs.size(); ++i)
    y.rows.push_back(Row{static_cast<std::int64_t>(i + 1), "b" + std::to_string(i), xs[i]});
  ds.years.push_back(std::move(y));
  return ds;
}

} // namespace

TEST(Composite, PartitionCount) {
  RandomStream rng(7);
  const auto m = DistributionModel::pareto(1.4462, 7011.0);
  const auto xs = simulate_composite(42, 8, m, 7011.0, rng);
  ASSERT_EQ(xs.size(), 50u);
  EXPECT_EQ(std::count_if(xs.begin(), xs.end(), [](double x) { return x < 7011.0; }), 42);
  for (double x : xs)
    EXPECT_GE(x, 1.0);
}

TEST(Composite, DeterministicAndPureModel) {
  const auto m = DistributionModel::pareto(2.0, 5.0);
  RandomStream a(3), b(3);
  EXPECT_EQ(simulate_composite(10, 20, m, 5.0, a), simulate_composite(10, 20, m, 5.0, b));
  RandomStream c(4);
  const auto pure = simulate_composite(0, 20, m, 5.0, c);
  EXPECT_EQ(pure.size(), 20u);
  for (double x : pure)
    EXPECT_GE(x, 5.0);
  RandomStream d(5);
  EXPECT_THROW(simulate_composite(3, 0, m, 5.0, d), Error);
}

TEST(Composite, NoRoomBelowCutoff) {
  const auto m = DistributionModel::pareto(2.0, 1.0);
  RandomStream rng(6);
  EXPECT_EQ(simulate_composite(5, 10, m, 1.0, rng).size(), 10u);
}

TEST(Composite, ZipfRanks) {
  const auto m = DistributionModel::zipf(1.3, 30);
  RandomStream rng(8);
  const auto xs = simulate_composite(0, 30, m, 1.0, rng);
  for (double x : xs) {
    EXPECT_EQ(x, std::floor(x));
    EXPECT_GE(x, 1.0);
    EXPECT_LE(x, 30.0);
  }
}

TEST(Bootstrap, ZeroIterationsIsDomainError) {
  const auto xs = pareto_data(2.0, 1.0, 30, 1);
  const auto f = fit(xs, ModelKind::Pareto);
  try {
    bootstrap_pvalue(f, xs, 0, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::Domain);
  }
}

TEST(Bootstrap, MismatchedFit) {
  const auto xs = pareto_data(2.0, 1.0, 30, 1);
  const auto f = fit(xs, ModelKind::Pareto);
  const std::vector<double> other(xs.begin(), xs.begin() + 20);
  EXPECT_THROW(bootstrap_pvalue(f, other, 10, 1), Error);
}

TEST(Bootstrap, SingleIterationIsZeroOrOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto xs = pareto_data(2.0, 1.0, 25, seed);
    const auto r = bootstrap_pvalue(fit(xs, ModelKind::Pareto), xs, 1, seed);
    EXPECT_TRUE(r.p_value == 0.0 || r.p_value == 1.0);
  }
}

TEST(Bootstrap, RangeAndExactness) {
  const auto xs = pareto_data(1.8, 10.0, 60, 2);
  const auto r = bootstrap_pvalue(fit(xs, ModelKind::Pareto), xs, 137, 11);
  EXPECT_GE(r.kst_data, 0.0);
  EXPECT_LE(r.kst_data, 1.0);
  EXPECT_EQ(r.iterations, 137u);
  EXPECT_EQ(r.p_value, static_cast<double>(r.p_counter) / 137.0);
  EXPECT_EQ(r.decision, decide(r.p_value, 0.1));
}

TEST(Bootstrap, Deterministic) {
  const auto xs = pareto_data(2.2, 3.0, 40, 3);
  const auto f = fit(xs, ModelKind::Pareto);
  const auto a = bootstrap_pvalue(f, xs, 200, 77);
  const auto b = bootstrap_pvalue(f, xs, 200, 77);
  EXPECT_EQ(a.p_counter, b.p_counter);
  EXPECT_EQ(a.kst_data, b.kst_data);
}

TEST(Bootstrap, ParallelBitIdentical) {
  const auto xs = pareto_data(2.2, 3.0, 80, 4);
  const auto f = fit(xs, ModelKind::Pareto);
  BootstrapOptions opt;
  opt.keep_trace = true;
  const auto serial = bootstrap_pvalue(f, xs, 301, 42, opt);
  for (std::size_t k : {2u, 4u, 8u}) {
    opt.workers = k;
    const auto par = bootstrap_pvalue(f, xs, 301, 42, opt);
    EXPECT_EQ(par.kst_sim, serial.kst_sim) << k;
    EXPECT_EQ(par.p_counter, serial.p_counter) << k;
    EXPECT_EQ(par.p_value, serial.p_value) << k;
  }
}

TEST(Bootstrap, MatchesStraightLineReference) {
  RandomStream meta(555);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + meta() % 12;
    const std::size_t B = 1 + meta() % 20;
    const std::uint64_t seed = meta();
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i)
      xs.push_back(1.0 + std::floor(50.0 * std::pow(1.0 - meta.uniform01(), -0.7)));
    FitResult f;
    try {
      f = fit(xs, ModelKind::Pareto);
    } catch (const Error &) {
      continue;
    }
    BootstrapOptions opt;
    opt.keep_trace = true;
    opt.year_index = 3;
    const auto got = bootstrap_pvalue(f, xs, B, seed, opt);

    const double alpha = f.alpha, cut = f.xmin_est;
    auto cdf = [&](double x) { return oracle::pareto_cdf(alpha, cut, x); };
    std::vector<double> tail;
    for (double x : xs)
      if (x >= cut)
        tail.push_back(x);
    const double kstd = oracle::ks_supremum(tail, cdf);
    EXPECT_EQ(got.kst_data, kstd);

    std::size_t p = 0;
    for (std::size_t i = 0; i < B; ++i) {
      auto rng = RandomStream::derive(seed, {3, i});
      std::vector<double> sim;
      const std::size_t n1 = 1.0 < cut ? f.n1 : 0;
      for (std::size_t j = 0; j < n1; ++j) {
        double u = 1.0 + (cut - 1.0) * rng.uniform01();
        sim.push_back(u < cut ? u : std::nextafter(cut, 1.0));
      }
      for (std::size_t j = 0; j < f.n2; ++j)
        sim.push_back(std::max(cut, cut * std::pow(1.0 - rng.uniform01(), -1.0 / (alpha - 1.0))));
      std::vector<double> sim_tail;
      for (double x : sim)
        if (x >= cut)
          sim_tail.push_back(x);
      const double kst = oracle::ks_supremum(sim_tail, cdf);
      EXPECT_EQ(got.kst_sim[i], kst) << trial << " " << i;
      if (!(kstd > kst))
        ++p;
    }
    EXPECT_EQ(got.p_counter, p) << trial;
  }
}

TEST(Bootstrap, CalibratedUnderNull) {
  // Data drawn from a fixed model; tested against that same fit.
  const std::vector<double> base = pareto_data(2.0, 50.0, 40, 5);
  const auto f = fit(base, ModelKind::Pareto);
  double sum = 0.0;
  int kept = 0;
  const int reps = 60;
  for (int r = 0; r < reps; ++r) {
    auto rng = RandomStream::derive(900, {static_cast<std::uint64_t>(r)});
    const auto xs = simulate_composite(f.n1, f.n2, f.model(), f.xmin_est, rng);
    const auto res = bootstrap_pvalue(f, xs, 300, 1000 + r);
    sum += res.p_value;
    kept += res.p_value >= 0.1 ? 1 : 0;
  }
  EXPECT_GE(kept, static_cast<int>(0.85 * reps));
  EXPECT_GT(sum / reps, 0.35);
  EXPECT_LT(sum / reps, 0.65);
}

TEST(Bootstrap, OutliersDoNotRaisePValue) {
  int ok = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    auto xs = pareto_data(2.5, 10.0, 50, 7000 + r);
    const auto clean = bootstrap_pvalue(fit(xs, ModelKind::Pareto), xs, 200, r);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = xs.size() - 3; i < xs.size(); ++i)
      xs[i] *= 1000.0;
    const auto dirty = bootstrap_pvalue(fit(xs, ModelKind::Pareto), xs, 200, r);
    ok += dirty.p_value <= clean.p_value ? 1 : 0;
  }
  EXPECT_GE(ok, 95);
}

TEST(RunTest, DescendingYearsAndStreams) {
  Dataset ds = single_year(pareto_data(2.0, 1.0, 30, 1), "2014");
  ds.years.push_back(single_year(pareto_data(2.0, 1.0, 30, 2), "2016").years[0]);
  ds.years.push_back(single_year(pareto_data(2.0, 1.0, 30, 3), "2015").years[0]);
  const auto out = run_test(ds, ModelKind::Pareto, 50, AlphaMode::PaperLiteral, 9);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].year, "2016");
  EXPECT_EQ(out[1].year, "2015");
  EXPECT_EQ(out[2].year, "2014");
  for (const auto &o : out)
    EXPECT_TRUE(o.ok()) << o.error;
  // Year 2015 is report index 1.
  BootstrapOptions opt;
  opt.year_index = 1;
  const auto v = ds.years[2].values();
  EXPECT_EQ(out[1].gof->p_counter,
            bootstrap_pvalue(fit(v, ModelKind::Pareto), v, 50, 9, opt).p_counter);
}

TEST(RunTest, NonNumericYearReportedAndSkipped) {
  Dataset ds = single_year(pareto_data(2.0, 1.0, 30, 1), "2016");
  YearTable bad;
  bad.label = "2015";
  for (int i = 0; i < 10; ++i)
    bad.rows.push_back(Row{i + 1, "x" + std::to_string(i), std::nullopt});
  ds.years.push_back(bad);
  const auto out = run_test(ds, ModelKind::Pareto, 20, AlphaMode::PaperLiteral, 1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].ok());
  EXPECT_FALSE(out[1].ok());
  EXPECT_EQ(out[1].year, "2015");
  EXPECT_EQ(out[1].excluded_rows, 10u);
  EXPECT_FALSE(out[1].error.empty());
}

TEST(RunTest, ZipfHypothesis) {
  std::vector<double> xs;
  for (int k = 1; k <= 40; ++k)
    xs.push_back(1000.0 * std::pow(k, -1.2));
  const auto out =
      run_test(single_year(xs), ModelKind::Zipf, 100, AlphaMode::PaperLiteral, 3);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_TRUE(out[0].ok()) << out[0].error;
  EXPECT_EQ(out[0].fit->n2, 40u);
  EXPECT_GE(out[0].gof->p_value, 0.0);
  EXPECT_LE(out[0].gof->p_value, 1.0);
}

TEST(RunTest, SingleYearNotRejectedMostly) {
  int kept = 0;
  for (std::uint64_t r = 0; r < 40; ++r) {
    auto rng = RandomStream::derive(31, {r});
    const auto xs = pareto_sample(DistributionModel::pareto(2.0, 1.0), rng, 60);
    const auto out = run_test(single_year(xs), ModelKind::Pareto, 200,
                              AlphaMode::PaperLiteral, r);
    kept += out[0].ok() && out[0].gof->decision == Decision::NotRejected ? 1 : 0;
  }
  EXPECT_GE(kept, 34);
}
