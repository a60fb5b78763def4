#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "heavytail/dataset.hpp"
#include "heavytail/error.hpp"
#include "heavytail/estimation.hpp"
#include "heavytail/ks.hpp"
#include "heavytail/models.hpp"
#include "heavytail/random.hpp"

namespace heavytail {

enum class Decision { NotRejected, Rejected };

inline std::string to_string(Decision d) {
  return d == Decision::NotRejected ? "not_rejected" : "rejected";
}

inline constexpr double default_significance = 0.1;

/// Lower bound of the uniform component drawn below the cutoff: the
/// constant 1, or the smallest observed value.
enum class UniformLower { One, DataMin };

struct GofResult {
  ModelKind hypothesis = ModelKind::Pareto;
  double kst_data = 0.0;
  std::size_t p_counter = 0;
  std::size_t iterations = 0;
  double p_value = 0.0;
  Decision decision = Decision::NotRejected;
  /// Per-iteration simulated statistics, filled only on request.
  std::vector<double> kst_sim;
};

struct BootstrapOptions {
  std::size_t workers = 1;
  std::uint64_t year_index = 0;
  double significance = default_significance;
  UniformLower uniform_lower = UniformLower::One;
  bool keep_trace = false;
};

inline Decision decide(double p_value, double significance) {
  return p_value >= significance ? Decision::NotRejected : Decision::Rejected;
}

/// n1 uniform draws on [uniform_lo, xmin_est) followed by n2 draws from the
/// model: Pareto at (alpha, xmin_est), or Zipf ranks with N = n1 + n2.
/// If uniform_lo >= xmin_est there is no room below the cutoff and n1 is
/// treated as 0.
inline std::vector<double> simulate_composite(std::size_t n1, std::size_t n2,
                                              const DistributionModel &model,
                                              double xmin_est, RandomStream &rng,
                                              double uniform_lo = 1.0) {
  if (n2 == 0)
    throw Error(ErrorCode::Domain, "composite sample needs n2 >= 1");
  if (!(uniform_lo < xmin_est))
    n1 = 0;
  std::vector<double> out;
  out.reserve(n1 + n2);
  if (n1 > 0)
    out = uniform_sample(uniform_lo, xmin_est, rng, n1);
  if (model.kind() == ModelKind::Pareto) {
    const auto tail = pareto_sample(DistributionModel::pareto(model.alpha(), xmin_est), rng, n2);
    out.insert(out.end(), tail.begin(), tail.end());
  } else {
    const ZipfTable table(DistributionModel::zipf(model.alpha(), n1 + n2));
    for (std::size_t r : table.sample(rng, n2))
      out.push_back(static_cast<double>(r));
  }
  return out;
}

namespace detail {

inline std::vector<double> tail_at(std::span<const double> values, double cutoff) {
  std::vector<double> tail;
  for (double x : values)
    if (x >= cutoff)
      tail.push_back(x);
  std::sort(tail.begin(), tail.end());
  return tail;
}

} // namespace detail

/// Observed KS statistic against the fitted model: the tail at xmin_est for
/// Pareto, the rank/value-share form for Zipf.
inline double observed_statistic(const FitResult &fit, std::span<const double> values) {
  if (fit.kind == ModelKind::Zipf)
    return zipf_share_distance(values, ZipfTable(fit.model()));
  const auto tail = detail::tail_at(values, fit.xmin_est);
  const auto model = fit.model();
  return ks_distance_sorted(tail, [&](double x) { return pareto_cdf(model, x); });
}

/// One bootstrap replicate: the KS statistic of a composite sample drawn from
/// the stream keyed by (master_seed, year_index, iteration).
inline double simulated_statistic(const FitResult &fit, double uniform_lo,
                                  std::uint64_t master_seed, std::uint64_t year_index,
                                  std::uint64_t iteration) {
  auto rng = RandomStream::derive(master_seed, {year_index, iteration});
  const auto model = fit.model();
  const auto sample = simulate_composite(fit.n1, fit.n2, model, fit.xmin_est, rng, uniform_lo);
  if (fit.kind == ModelKind::Zipf)
    return ks_statistic(sample, model);
  const auto tail = detail::tail_at(sample, fit.xmin_est);
  return ks_distance_sorted(tail, [&](double x) { return pareto_cdf(model, x); });
}

/// Semi-parametric bootstrap p-value. An iteration counts toward P unless the
/// data statistic strictly exceeds the simulated one, so P / B is the share of
/// simulated samples that fit the model no better than the data did.
/// Results are identical for any worker count.
inline GofResult bootstrap_pvalue(const FitResult &fit, std::span<const double> values,
                                  std::size_t iterations, std::uint64_t master_seed,
                                  const BootstrapOptions &options = {}) {
  if (iterations == 0)
    throw Error(ErrorCode::Domain, "bootstrap needs at least one iteration");
  validate_values(values);
  if (fit.n() != values.size())
    throw Error(ErrorCode::Precondition, "fit was produced from a different sample");

  GofResult result;
  result.hypothesis = fit.kind;
  result.iterations = iterations;
  result.kst_data = observed_statistic(fit, values);

  const double uniform_lo = options.uniform_lower == UniformLower::One
                                ? 1.0
                                : *std::min_element(values.begin(), values.end());

  std::vector<double> sims(iterations);
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, iterations);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      sims[i] = simulated_statistic(fit, uniform_lo, master_seed, options.year_index, i);
  };
  if (workers == 1) {
    run_range(0, iterations);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> failures(workers);
    const std::size_t chunk = (iterations + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(iterations, w * chunk);
      const std::size_t end = std::min(iterations, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run_range(begin, end);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto &failure : failures)
      if (failure)
        std::rethrow_exception(failure);
  }

  for (double sim : sims)
    if (!(result.kst_data > sim))
      ++result.p_counter;
  result.p_value = static_cast<double>(result.p_counter) / static_cast<double>(iterations);
  result.decision = decide(result.p_value, options.significance);
  if (options.keep_trace)
    result.kst_sim = std::move(sims);
  return result;
}

// --- per-dataset driver -------------------------------------------------------

struct YearOutcome {
  std::string year;
  std::size_t excluded_rows = 0;
  std::optional<FitResult> fit;
  std::optional<GofResult> gof;
  std::string error;

  bool ok() const noexcept { return fit.has_value() && gof.has_value(); }
};

struct TestOptions {
  std::size_t workers = 1;
  double significance = default_significance;
  UniformLower uniform_lower = UniformLower::One;
};

namespace detail {

inline bool all_digits(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c >= '0' && c <= '9';
  });
}

} // namespace detail

/// Year order used by every per-year report: descending when all labels are
/// numeric years, otherwise the dataset's own order.
inline std::vector<std::size_t> descending_year_order(const Dataset &dataset) {
  std::vector<std::size_t> order(dataset.years.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  const bool numeric = std::all_of(dataset.years.begin(), dataset.years.end(),
                                   [](const YearTable &y) { return detail::all_digits(y.label); });
  if (numeric) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto &la = dataset.years[a].label;
      const auto &lb = dataset.years[b].label;
      if (la.size() != lb.size())
        return la.size() > lb.size();
      return la > lb;
    });
  }
  return order;
}

/// Fit and bootstrap every year. Failing years are reported with their error
/// and skipped; the stream for year i (in report order) is keyed by i.
inline std::vector<YearOutcome> run_test(const Dataset &dataset, ModelKind hypothesis,
                                         std::size_t iterations, AlphaMode mode,
                                         std::uint64_t master_seed,
                                         const TestOptions &options = {}) {
  if (dataset.years.empty())
    throw Error(ErrorCode::Precondition, "dataset has no years");
  if (iterations == 0)
    throw Error(ErrorCode::Domain, "bootstrap needs at least one iteration");

  std::vector<YearOutcome> outcomes;
  std::uint64_t index = 0;
  for (std::size_t y : descending_year_order(dataset)) {
    const auto &year = dataset.years[y];
    YearOutcome outcome;
    outcome.year = year.label;
    outcome.excluded_rows = year.missing_values();
    const auto values = year.values();
    try {
      if (values.size() < 3)
        throw Error(ErrorCode::InsufficientData,
                    "year has " + std::to_string(values.size()) +
                        " numeric values, at least 3 are required");
      outcome.fit = fit(values, hypothesis, mode);
      BootstrapOptions boot;
      boot.workers = options.workers;
      boot.year_index = index;
      boot.significance = options.significance;
      boot.uniform_lower = options.uniform_lower;
      outcome.gof = bootstrap_pvalue(*outcome.fit, values, iterations, master_seed, boot);
    } catch (const Error &e) {
      outcome.fit.reset();
      outcome.gof.reset();
      outcome.error = e.what();
    }
    outcomes.push_back(std::move(outcome));
    ++index;
  }
  return outcomes;
}

} // namespace heavytail
