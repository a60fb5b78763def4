#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "heavytail/error.hpp"
#include "heavytail/random.hpp"

namespace heavytail {

enum class ModelKind { Pareto, Zipf };

inline std::string to_string(ModelKind kind) {
  return kind == ModelKind::Pareto ? "Pareto" : "Zipf";
}

/// Continuous power law above xmin, or Zipf truncated at n_ranks.
/// For Zipf, alpha is the exponent s (= 1 + beta) and xmin is always 1;
/// the truncated law is defined for any s > 0.
class DistributionModel {
public:
  static DistributionModel pareto(double alpha, double xmin) {
    if (!(alpha > 1.0) || !std::isfinite(alpha))
      throw Error(ErrorCode::Domain, "Pareto alpha must be finite and > 1");
    if (!(xmin > 0.0) || !std::isfinite(xmin))
      throw Error(ErrorCode::Domain, "Pareto xmin must be finite and > 0");
    return DistributionModel(ModelKind::Pareto, alpha, xmin, 0);
  }

  static DistributionModel zipf(double s, std::size_t n_ranks) {
    // Truncation keeps the law normalizable for any s > 0.
    if (!(s > 0.0) || !std::isfinite(s))
      throw Error(ErrorCode::Domain, "Zipf exponent must be finite and > 0");
    if (n_ranks < 1)
      throw Error(ErrorCode::Domain, "Zipf needs at least one rank");
    return DistributionModel(ModelKind::Zipf, s, 1.0, n_ranks);
  }

  ModelKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return alpha_ - 1.0; }
  double xmin() const noexcept { return xmin_; }
  std::size_t n_ranks() const noexcept { return n_ranks_; }

  bool operator==(const DistributionModel &) const = default;

private:
  DistributionModel(ModelKind kind, double alpha, double xmin, std::size_t n)
      : kind_(kind), alpha_(alpha), xmin_(xmin), n_ranks_(n) {}

  ModelKind kind_;
  double alpha_;
  double xmin_;
  std::size_t n_ranks_;
};

namespace detail {
inline void require_kind(const DistributionModel &model, ModelKind kind) {
  if (model.kind() != kind)
    throw Error(ErrorCode::Domain, "expected a " + to_string(kind) + " model");
}
} // namespace detail

// --- Pareto -----------------------------------------------------------------

/// F(x) = 1 - (x / xmin)^-(alpha - 1) for x >= xmin, 0 below the cutoff.
inline double pareto_cdf(const DistributionModel &model, double x) {
  detail::require_kind(model, ModelKind::Pareto);
  if (!(x > model.xmin()))
    return 0.0;
  return 1.0 - std::pow(x / model.xmin(), -(model.alpha() - 1.0));
}

inline double pareto_quantile(const DistributionModel &model, double u) {
  detail::require_kind(model, ModelKind::Pareto);
  if (!(u >= 0.0 && u < 1.0))
    throw Error(ErrorCode::Domain, "quantile level must lie in [0, 1)");
  return model.xmin() * std::pow(1.0 - u, -1.0 / (model.alpha() - 1.0));
}

inline std::vector<double> pareto_sample(const DistributionModel &model,
                                         RandomStream &rng, std::size_t n) {
  detail::require_kind(model, ModelKind::Pareto);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Rounding can push xmin * (1-u)^(-k) a hair below xmin for tiny u.
    out.push_back(std::max(model.xmin(), pareto_quantile(model, rng.uniform01())));
  }
  return out;
}

// --- Zipf -------------------------------------------------------------------

/// Precomputed cumulative table for a truncated Zipf law:
/// P(k) = k^-s / H(N, s), H(N, s) = sum_{j=1..N} j^-s.
class ZipfTable {
public:
  explicit ZipfTable(const DistributionModel &model) : model_(model) {
    detail::require_kind(model, ModelKind::Zipf);
    const std::size_t n = model.n_ranks();
    weights_.resize(n);
    cumulative_.resize(n);
    double running = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      weights_[k - 1] = std::pow(static_cast<double>(k), -model.alpha());
      running += weights_[k - 1];
      cumulative_[k - 1] = running;
    }
    harmonic_ = running;
    for (auto &c : cumulative_)
      c /= harmonic_;
    cumulative_.back() = 1.0;
  }

  const DistributionModel &model() const noexcept { return model_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double harmonic() const noexcept { return harmonic_; }

  double pmf(std::size_t k) const {
    check_rank(k);
    return weights_[k - 1] / harmonic_;
  }

  double cdf(std::size_t k) const {
    check_rank(k);
    return cumulative_[k - 1];
  }

  /// Inverse CDF: the smallest k with F(k) > u.
  std::size_t rank_for(double u) const noexcept {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end())
      return cumulative_.size();
    return static_cast<std::size_t>(it - cumulative_.begin()) + 1;
  }

  std::vector<std::size_t> sample(RandomStream &rng, std::size_t n) const {
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(rank_for(rng.uniform01()));
    return out;
  }

private:
  void check_rank(std::size_t k) const {
    if (k < 1 || k > weights_.size())
      throw Error(ErrorCode::Domain, "Zipf rank " + std::to_string(k) +
                                         " outside [1, " +
                                         std::to_string(weights_.size()) + "]");
  }

  DistributionModel model_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double harmonic_ = 0.0;
};

inline double zipf_pmf(const DistributionModel &model, std::size_t k) {
  return ZipfTable(model).pmf(k);
}

inline double zipf_cdf(const DistributionModel &model, std::size_t k) {
  return ZipfTable(model).cdf(k);
}

inline std::vector<std::size_t> zipf_sample(const DistributionModel &model,
                                            RandomStream &rng, std::size_t n) {
  return ZipfTable(model).sample(rng, n);
}

// --- Uniform ----------------------------------------------------------------

inline std::vector<double> uniform_sample(double lo, double hi, RandomStream &rng,
                                          std::size_t n) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::Domain, "uniform bounds need lo < hi");
  const double below_hi = std::nextafter(hi, lo);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * rng.uniform01();
    out.push_back(x < hi ? x : below_hi);
  }
  return out;
}

} // namespace heavytail
