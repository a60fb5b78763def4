#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "heavytail/error.hpp"
#include "heavytail/models.hpp"

namespace heavytail {

/// Two-sided KS distance between the ECDF of an ascending sample and a
/// continuous CDF. At the i-th point (0-based) the ECDF steps from i/n to
/// (i+1)/n, so both corners are checked.
template <class Cdf>
double ks_distance_sorted(std::span<const double> sorted, Cdf &&cdf) {
  if (sorted.empty())
    throw Error(ErrorCode::InsufficientData, "KS statistic of an empty sample");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double below = std::abs(f - static_cast<double>(i) / n);
    const double above = std::abs(static_cast<double>(i + 1) / n - f);
    d = std::max({d, below, above});
  }
  return d;
}

/// KS distance between a sample of ranks and a truncated Zipf law. Both are
/// step functions on the integers, so the supremum is attained at k = 1..N.
inline double zipf_rank_distance(std::span<const std::size_t> ranks,
                                 const ZipfTable &table) {
  if (ranks.empty())
    throw Error(ErrorCode::InsufficientData, "KS statistic of an empty sample");
  std::vector<std::size_t> counts(table.size() + 1, 0);
  for (std::size_t r : ranks) {
    if (r < 1 || r > table.size())
      throw Error(ErrorCode::Domain, "rank outside Zipf support");
    ++counts[r];
  }
  const double n = static_cast<double>(ranks.size());
  std::size_t seen = 0;
  double d = 0.0;
  for (std::size_t k = 1; k <= table.size(); ++k) {
    seen += counts[k];
    d = std::max(d, std::abs(static_cast<double>(seen) / n - table.cdf(k)));
  }
  return d;
}

/// D = sup |F(x) - F_n(x)| over the given tail. Pareto tails are treated as
/// continuous observations; Zipf tails must hold integer ranks in [1, N].
inline double ks_statistic(std::span<const double> tail,
                           const DistributionModel &model) {
  if (tail.empty())
    throw Error(ErrorCode::InsufficientData, "KS statistic of an empty tail");
  if (model.kind() == ModelKind::Pareto) {
    std::vector<double> sorted(tail.begin(), tail.end());
    std::sort(sorted.begin(), sorted.end());
    return ks_distance_sorted(sorted, [&](double x) { return pareto_cdf(model, x); });
  }
  std::vector<std::size_t> ranks;
  ranks.reserve(tail.size());
  for (double v : tail) {
    if (!(v >= 1.0) || v != std::floor(v))
      throw Error(ErrorCode::Domain, "Zipf observations must be positive integer ranks");
    ranks.push_back(static_cast<std::size_t>(v));
  }
  return zipf_rank_distance(ranks, ZipfTable(model));
}

/// Rank-value form used for observed ranking data under the Zipf hypothesis:
/// the cumulative share of total value held by the top k entries against the
/// Zipf CDF at k. N must equal the number of values.
inline double zipf_share_distance(std::span<const double> values,
                                  const ZipfTable &table) {
  if (values.empty())
    throw Error(ErrorCode::InsufficientData, "KS statistic of an empty sample");
  if (values.size() != table.size())
    throw Error(ErrorCode::Domain, "Zipf truncation must equal the number of values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>{});
  double total = 0.0;
  for (double v : sorted)
    total += v;
  double running = 0.0;
  double d = 0.0;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    running += sorted[k - 1];
    d = std::max(d, std::abs(running / total - table.cdf(k)));
  }
  return d;
}

} // namespace heavytail
