#include "extkm/sample.hpp"

#include "extkm/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace extkm {

void CensoredSample::push_back(const Observation& obs) {
  if (!z.empty() && obs.x.size() != static_cast<std::size_t>(m))
    throw value_error("CensoredSample: covariate dimension mismatch");
  if (z.empty()) m = static_cast<int>(obs.x.size());
  z.push_back(obs.z);
  delta.push_back(static_cast<std::uint8_t>(obs.delta));
  x.insert(x.end(), obs.x.begin(), obs.x.end());
}

SortedSample sort_with_concomitants(const CensoredSample& sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw size_error("sort_with_concomitants: need n >= 2, got " + std::to_string(n));

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (sample.z[a] != sample.z[b]) return sample.z[a] < sample.z[b];
    return sample.delta[a] > sample.delta[b]; // events before censorings at ties
  });

  SortedSample out;
  out.m = sample.m;
  out.z_sorted.resize(n);
  out.delta_concomitants.resize(n);
  out.x_concomitants.resize(n * static_cast<std::size_t>(sample.m));
  const std::size_t m = static_cast<std::size_t>(sample.m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = idx[i];
    out.z_sorted[i] = sample.z[src];
    out.delta_concomitants[i] = sample.delta[src];
    std::copy_n(sample.x.begin() + static_cast<std::ptrdiff_t>(src * m), m,
                out.x_concomitants.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  return out;
}

TailSubsample tail_subsample(const SortedSample& sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  if (k < 1 || k > n - 1)
    throw bounds_error("tail_subsample: k=" + std::to_string(k) + " outside [1, n-1] with n=" + std::to_string(n));
  const double threshold = sorted.z_sorted[n - k - 1];
  if (!(threshold > 0.0)) throw degenerate_error("tail_subsample: threshold z_{(n-k)} is not positive");

  TailSubsample out;
  out.k = k;
  out.threshold = threshold;
  out.m = sorted.m;
  out.v.resize(k);
  out.delta_star.resize(k);
  out.x_star.resize(k * static_cast<std::size_t>(sorted.m));
  const std::size_t m = static_cast<std::size_t>(sorted.m);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t src = n - 1 - i; // i-th largest
    out.v[i] = sorted.z_sorted[src] / threshold;
    out.delta_star[i] = sorted.delta_concomitants[src];
    std::copy_n(sorted.x_concomitants.begin() + static_cast<std::ptrdiff_t>(src * m), m,
                out.x_star.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  return out;
}

double censored_proportion(const SortedSample& sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  if (k < 1 || k > n - 1)
    throw bounds_error("censored_proportion: k=" + std::to_string(k) + " outside [1, n-1]");
  std::size_t censored = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (sorted.delta_concomitants[n - 1 - i] == 0) ++censored;
  return static_cast<double>(censored) / static_cast<double>(k);
}

} // namespace extkm
