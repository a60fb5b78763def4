#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "heavytail/dataset.hpp"
#include "heavytail/error.hpp"
#include "heavytail/gof.hpp"

namespace heavytail {

inline constexpr double decile_fraction = 0.1;
inline constexpr double quintile_fraction = 0.2;
inline constexpr double quartile_fraction = 0.25;

/// Size of the top/bottom share: round(n * fraction) with halves rounded away
/// from zero, clamped to [1, n/2] so the two shares never overlap.
inline std::size_t share_cut(std::size_t n, double fraction) {
  if (n < 2)
    throw Error(ErrorCode::InsufficientData, "share ratio needs at least 2 values");
  if (!(fraction > 0.0 && fraction <= 0.5))
    throw Error(ErrorCode::Domain, "share fraction must lie in (0, 0.5]");
  const long k = std::lround(static_cast<double>(n) * fraction);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1L)), 1, n / 2);
}

/// Sum of the k largest values over the sum of the k smallest.
inline double ratio_coefficient(std::span<const double> values, double fraction) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]) || !(values[i] > 0.0))
      throw Error(ErrorCode::Validation,
                  "value at index " + std::to_string(i) + " is not a positive finite number");
  const std::size_t k = share_cut(values.size(), fraction);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>{});
  double top = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    top += sorted[j];
  double bottom = 0.0;
  for (std::size_t j = sorted.size() - k; j < sorted.size(); ++j)
    bottom += sorted[j];
  return top / bottom;
}

struct CoefficientRow {
  std::string year;
  double decile = 0.0;
  double quintile = 0.0;
  double quartile = 0.0;
};

struct CoefficientSeries {
  std::vector<CoefficientRow> rows;
  /// Years that could not be computed, with the reason.
  std::vector<std::pair<std::string, std::string>> skipped;
};

/// Per-year decile (10%), quintile (20%) and quartile (25%) ratios, in the
/// same descending year order as the goodness-of-fit report.
inline CoefficientSeries coefficient_series(const Dataset &dataset) {
  CoefficientSeries series;
  for (std::size_t y : descending_year_order(dataset)) {
    const auto &year = dataset.years[y];
    const auto values = year.values();
    try {
      series.rows.push_back(CoefficientRow{year.label,
                                           ratio_coefficient(values, decile_fraction),
                                           ratio_coefficient(values, quintile_fraction),
                                           ratio_coefficient(values, quartile_fraction)});
    } catch (const Error &e) {
      series.skipped.emplace_back(year.label, e.what());
    }
  }
  return series;
}

} // namespace heavytail
