#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "heavytail/error.hpp"
#include "heavytail/ks.hpp"
#include "heavytail/models.hpp"

namespace heavytail {

/// How the exponent is treated while scanning candidate cutoffs.
/// PaperLiteral fits alpha once at min(values) and holds it fixed;
/// ClausetRefit refits alpha at every candidate.
enum class AlphaMode { PaperLiteral, ClausetRefit };

inline std::string to_string(AlphaMode mode) {
  return mode == AlphaMode::PaperLiteral ? "paper" : "refit";
}

struct FitResult {
  ModelKind kind = ModelKind::Pareto;
  AlphaMode mode = AlphaMode::PaperLiteral;
  double xmin_initial = 0.0;
  double alpha = 0.0;
  double xmin_est = 0.0;
  double d_min = 0.0;
  std::size_t d_index = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  std::size_t n() const noexcept { return n1 + n2; }
  double beta() const noexcept { return alpha - 1.0; }

  /// The fitted model the bootstrap tests against.
  DistributionModel model() const {
    return kind == ModelKind::Pareto ? DistributionModel::pareto(alpha, xmin_est)
                                     : DistributionModel::zipf(alpha, n());
  }

  bool operator==(const FitResult &) const = default;
};

struct ScanResult {
  double xmin_est = 0.0;
  double d_min = 0.0;
  std::size_t d_index = 0;
  double alpha = 0.0;
};

/// Rejects nonpositive or nonfinite observations, naming the first offender.
inline void validate_values(std::span<const double> values) {
  if (values.empty())
    throw Error(ErrorCode::InsufficientData, "no observations");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(values[i] > 0.0))
      throw Error(ErrorCode::Validation,
                  "value at index " + std::to_string(i) + " is not a positive finite number");
  }
}

/// Closed-form MLE: alpha = 1 + n / sum ln(x_i / xmin) over the x_i >= xmin.
inline double fit_alpha_mle(std::span<const double> values, double xmin) {
  if (!(xmin > 0.0) || !std::isfinite(xmin))
    throw Error(ErrorCode::Domain, "xmin must be positive and finite");
  // Summed in ascending order so the result does not depend on input order.
  std::vector<double> tail;
  for (double x : values)
    if (x >= xmin)
      tail.push_back(x);
  std::sort(tail.begin(), tail.end());
  const std::size_t n = tail.size();
  double log_sum = 0.0;
  for (double x : tail)
    log_sum += std::log(x / xmin);
  if (n < 2)
    throw Error(ErrorCode::InsufficientData,
                "need at least 2 values >= xmin, have " + std::to_string(n));
  if (!(log_sum > 0.0))
    throw Error(ErrorCode::DegenerateData, "all tail values equal xmin");
  return 1.0 + static_cast<double>(n) / log_sum;
}

namespace detail {

inline ScanResult scan_pareto(std::span<const double> values, AlphaMode mode) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::size_t unique_count = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (i == 0 || sorted[i] != sorted[i - 1])
      ++unique_count;
  if (unique_count < 3)
    throw Error(ErrorCode::InsufficientData,
                "xmin scan needs at least 3 distinct values, have " +
                    std::to_string(unique_count));

  const double fixed_alpha =
      mode == AlphaMode::PaperLiteral ? fit_alpha_mle(sorted, sorted.front()) : 0.0;

  ScanResult best;
  bool found = false;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1])
      continue;
    const std::size_t tail_size = sorted.size() - i;
    if (tail_size < 2)
      break;
    const double candidate = sorted[i];
    const std::span<const double> tail(sorted.data() + i, tail_size);

    double alpha = fixed_alpha;
    if (mode == AlphaMode::ClausetRefit) {
      try {
        alpha = fit_alpha_mle(tail, candidate);
      } catch (const Error &e) {
        if (e.code() == ErrorCode::DegenerateData)
          continue;
        throw;
      }
    }
    const auto model = DistributionModel::pareto(alpha, candidate);
    const double d =
        ks_distance_sorted(tail, [&](double x) { return pareto_cdf(model, x); });
    if (!found || d < best.d_min) {
      best = ScanResult{candidate, d, sorted.size() - tail_size, alpha};
      found = true;
    }
  }
  if (!found)
    throw Error(ErrorCode::InsufficientData, "no candidate cutoff leaves a usable tail");

  // Position of the cutoff in descending (rank) order.
  best.d_index = static_cast<std::size_t>(
      std::count_if(sorted.begin(), sorted.end(), [&](double x) { return x > best.xmin_est; }));
  return best;
}

} // namespace detail

/// KS-minimizing cutoff over the unique data values. Candidates that leave
/// fewer than 2 tail points are skipped; ties go to the smaller candidate.
/// Under Zipf the cutoff is fixed at 1 and no scan takes place.
inline ScanResult scan_xmin(std::span<const double> values, AlphaMode mode,
                            ModelKind kind) {
  validate_values(values);
  if (kind == ModelKind::Pareto)
    return detail::scan_pareto(values, mode);

  const double alpha = fit_alpha_mle(values, 1.0);
  const ZipfTable table(DistributionModel::zipf(alpha, values.size()));
  return ScanResult{1.0, zipf_share_distance(values, table), 0, alpha};
}

inline FitResult fit(std::span<const double> values, ModelKind kind,
                     AlphaMode mode = AlphaMode::PaperLiteral) {
  validate_values(values);
  FitResult result;
  result.kind = kind;
  result.mode = mode;

  if (kind == ModelKind::Zipf) {
    const ScanResult scan = scan_xmin(values, mode, kind);
    result.xmin_initial = 1.0;
    result.alpha = scan.alpha;
    result.xmin_est = 1.0;
    result.d_min = scan.d_min;
    result.d_index = 0;
    result.n1 = 0;
    result.n2 = values.size();
    return result;
  }

  result.xmin_initial = *std::min_element(values.begin(), values.end());
  // Step order: alpha at the initial cutoff first (this is also where
  // all-identical data is reported as degenerate), then the scan.
  const double initial_alpha = fit_alpha_mle(values, result.xmin_initial);
  const ScanResult scan = scan_xmin(values, mode, kind);
  result.alpha = mode == AlphaMode::PaperLiteral ? initial_alpha : scan.alpha;
  result.xmin_est = scan.xmin_est;
  result.d_min = scan.d_min;
  result.d_index = scan.d_index;
  result.n1 = static_cast<std::size_t>(std::count_if(
      values.begin(), values.end(), [&](double x) { return x < scan.xmin_est; }));
  result.n2 = values.size() - result.n1;
  return result;
}

} // namespace heavytail
