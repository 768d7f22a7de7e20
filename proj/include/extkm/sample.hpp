#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace extkm {

/// One observed triple: z = min(Y,C), delta = 1{Y <= C}, covariates x.
struct Observation {
  double z = 0.0;
  int delta = 0;
  std::vector<double> x;
};

/// Raw right-censored sample with fixed covariate dimension m.
/// Covariates are stored row-major: x[i*m + j] is coordinate j of
/// observation i.
struct CensoredSample {
  std::vector<double> z;
  std::vector<std::uint8_t> delta;
  std::vector<double> x;
  int m = 1;

  std::size_t size() const { return z.size(); }
  std::span<const double> covariates(std::size_t i) const {
    return {x.data() + i * static_cast<std::size_t>(m), static_cast<std::size_t>(m)};
  }
  void push_back(const Observation& obs);
};

/// z in ascending order together with the delta and covariate
/// concomitants. At tied z the uncensored observation comes first
/// (events before censorings), further ties keep input order.
struct SortedSample {
  std::vector<double> z_sorted;
  std::vector<std::uint8_t> delta_concomitants;
  std::vector<double> x_concomitants; // row-major, same order as z_sorted
  int m = 1;

  std::size_t size() const { return z_sorted.size(); }
  std::span<const double> covariates(std::size_t i) const {
    return {x_concomitants.data() + i * static_cast<std::size_t>(m), static_cast<std::size_t>(m)};
  }
};

/// Top-k order statistics rescaled by the threshold z_{(n-k)}, largest
/// first: v[0] >= v[1] >= ... >= v[k-1] >= 1, with matching concomitants.
struct TailSubsample {
  std::size_t k = 0;
  double threshold = 0.0;
  std::vector<double> v;
  std::vector<std::uint8_t> delta_star;
  std::vector<double> x_star; // row-major
  int m = 1;

  std::span<const double> covariates(std::size_t i) const {
    return {x_star.data() + i * static_cast<std::size_t>(m), static_cast<std::size_t>(m)};
  }
};

/// Sorts ascending by z, carrying delta and x along. Stable; at equal z
/// the uncensored observation is placed before the censored one.
/// Throws size_error for n < 2.
SortedSample sort_with_concomitants(const CensoredSample& sample);

/// Extracts the top-k rescaled subsample v_i = z_{(n-i+1)} / z_{(n-k)}.
/// Requires 1 <= k <= n-1 and a positive threshold.
TailSubsample tail_subsample(const SortedSample& sorted, std::size_t k);

/// Fraction of censored observations among the top k.
double censored_proportion(const SortedSample& sorted, std::size_t k);

} // namespace extkm
