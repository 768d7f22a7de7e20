#pragma once

#include "extkm/km.hpp"
#include "extkm/phi.hpp"
#include "extkm/sample.hpp"

#include <map>
#include <vector>

namespace extkm {

/// Axis-aligned covariate region. Default membership is the half-open
/// box (lower, upper]; the closedness flags override per bound.
struct Region {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> closed_lower; // default false: lower bound excluded
  std::vector<bool> closed_upper; // default true: upper bound included

  Region() = default;
  Region(double lo, double hi) : Region(std::vector<double>{lo}, std::vector<double>{hi}) {}
  Region(std::vector<double> lo, std::vector<double> hi);

  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
};

/// Indicator of the region as an integrand, phi(x,y) = 1{x in R}.
PhiFunction phi_indicator_region(const Region& region);

struct KernelConfig {
  double center = 0.0;
  double bandwidth = 0.1; // must be positive
};

/// S_{k,n}(1{x in R}) with its plug-in Gaussian interval. Converges to
/// the probability that a tail event carries covariates in R.
EstimateWithCI region_probability(const SortedSample& sorted, std::size_t k, const Region& region, double level);
EstimateWithCI region_probability(const CensoredSample& sample, std::size_t k, const Region& region, double level);

/// Benchmark that ignores the censoring indicators: fraction of the top
/// k observations (by z) whose covariates lie in R.
double naive_region_estimator(const SortedSample& sorted, std::size_t k, const Region& region);
double naive_region_estimator(const CensoredSample& sample, std::size_t k, const Region& region);

/// Classical Hill estimator on the top k (no censoring adaptation);
/// diagnostic companion to the censored-proportion plot.
double hill_estimator(const SortedSample& sorted, std::size_t k);
double hill_estimator(const CensoredSample& sample, std::size_t k);

/// Rule-of-thumb bandwidth 0.9 * min(sd, IQR/1.34) * n^(-1/5) with
/// type-7 quantiles; falls back to sd when the robust scale is zero and
/// rejects constant input.
double bandwidth_select(std::vector<double> values);

/// Kernel-smoothed tail index at cfg.center:
///   gamma_hat(a) = S(dnorm((x-a)/h) log y) / S(dnorm((x-a)/h)).
/// The ratio interval uses the delta method on the joint plug-in
/// covariance of the two integrals (the interval is an extension; the
/// point estimate follows the smoothed-ratio definition).
EstimateWithCI kernel_tail_index(const SortedSample& sorted, std::size_t k, const KernelConfig& cfg, double level);
EstimateWithCI kernel_tail_index(const CensoredSample& sample, std::size_t k, const KernelConfig& cfg, double level);

/// Pass as bandwidth to resolve it from the top-k covariates.
inline constexpr double kAutoBandwidth = -1.0;

struct TailIndexPoint {
  double center = 0.0;
  double bandwidth = 0.0;
  EstimateWithCI estimate;
};

/// gamma_hat(a) over a grid of centers; bandwidth kAutoBandwidth selects
/// the rule-of-thumb value from the top-k covariate concomitants.
std::vector<TailIndexPoint> tail_index_curve(const SortedSample& sorted, std::size_t k,
                                             const std::vector<double>& grid, double bandwidth, double level);

struct CategoryDistribution {
  std::map<double, double> raw;        // S_{k,n}(1{x = c})
  std::map<double, double> normalized; // raw rescaled to sum to 1
};

/// Tail distribution over categorical covariate codes (scalar covariate
/// holding the code). Throws degenerate_error when all raw masses are 0.
CategoryDistribution category_distribution(const SortedSample& sorted, std::size_t k,
                                           const std::vector<double>& categories);

} // namespace extkm
