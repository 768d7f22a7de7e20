#include "extkm/estimators.hpp"

#include "extkm/errors.hpp"
#include "extkm/parallel.hpp"
#include "extkm/stats.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

namespace extkm {

Region::Region(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw value_error("Region: bound dimension mismatch");
  for (std::size_t j = 0; j < lower.size(); ++j)
    if (!(lower[j] < upper[j])) throw value_error("Region: need lower < upper in every coordinate");
}

bool Region::contains(std::span<const double> x) const {
  if (x.size() != dim()) throw value_error("Region: covariate dimension mismatch");
  for (std::size_t j = 0; j < dim(); ++j) {
    const bool cl = j < closed_lower.size() ? closed_lower[j] : false;
    const bool cu = j < closed_upper.size() ? closed_upper[j] : true;
    if (cl ? x[j] < lower[j] : x[j] <= lower[j]) return false;
    if (cu ? x[j] > upper[j] : x[j] >= upper[j]) return false;
  }
  return true;
}

PhiFunction phi_indicator_region(const Region& region) {
  PhiFunction f;
  f.value = [region](std::span<const double> x, double) { return region.contains(x) ? 1.0 : 0.0; };
  f.envelope = [](double) { return 1.0; };
  f.dy = [](std::span<const double>, double) { return 0.0; };
  return f;
}

EstimateWithCI region_probability(const SortedSample& sorted, std::size_t k, const Region& region, double level) {
  if (region.dim() != static_cast<std::size_t>(sorted.m))
    throw value_error("region_probability: region dimension " + std::to_string(region.dim()) +
                      " != covariate dimension " + std::to_string(sorted.m));
  const auto tail = tail_subsample(sorted, k);
  return ekmi_confidence_interval(tail, phi_indicator_region(region), level);
}

EstimateWithCI region_probability(const CensoredSample& sample, std::size_t k, const Region& region, double level) {
  return region_probability(sort_with_concomitants(sample), k, region, level);
}

double naive_region_estimator(const SortedSample& sorted, std::size_t k, const Region& region) {
  const std::size_t n = sorted.size();
  if (k < 1 || k > n - 1) throw bounds_error("naive_region_estimator: k outside [1, n-1]");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (region.contains(sorted.covariates(n - 1 - i))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double naive_region_estimator(const CensoredSample& sample, std::size_t k, const Region& region) {
  return naive_region_estimator(sort_with_concomitants(sample), k, region);
}

double hill_estimator(const SortedSample& sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  if (k < 1 || k > n - 1) throw bounds_error("hill_estimator: k outside [1, n-1]");
  const double threshold = sorted.z_sorted[n - k - 1];
  if (!(threshold > 0.0)) throw domain_error("hill_estimator: nonpositive threshold");
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double z = sorted.z_sorted[n - 1 - i];
    if (!(z > 0.0)) throw domain_error("hill_estimator: nonpositive observation");
    acc += std::log(z / threshold);
  }
  return acc / static_cast<double>(k);
}

double hill_estimator(const CensoredSample& sample, std::size_t k) {
  return hill_estimator(sort_with_concomitants(sample), k);
}

double bandwidth_select(std::vector<double> values) {
  if (values.size() < 2) throw size_error("bandwidth_select: need at least 2 values");
  const double sd = std::sqrt(stats::sample_variance(values));
  const double iqr = stats::quantile_type7(values, 0.75) - stats::quantile_type7(values, 0.25);
  double scale = std::min(sd, iqr / 1.34);
  if (scale == 0.0) scale = sd;
  if (!(scale > 0.0)) throw degenerate_error("bandwidth_select: all values identical");
  return 0.9 * scale * std::pow(static_cast<double>(values.size()), -0.2);
}

namespace {

EstimateWithCI ratio_with_delta_method(const TailSubsample& tail, const KernelConfig& cfg, double level) {
  const auto num = plugin_terms(tail, phi_gaussian_kernel(cfg.center, cfg.bandwidth, true));
  const auto den = plugin_terms(tail, phi_gaussian_kernel(cfg.center, cfg.bandwidth, false));
  if (!(den.integral > std::numeric_limits<double>::epsilon()))
    throw degenerate_error("kernel_tail_index: no weight mass near center " + std::to_string(cfg.center));

  const double ratio = num.integral / den.integral;
  const double s2 = den.integral;
  const double v11 = stats::sample_variance(num.what);
  const double v22 = stats::sample_variance(den.what);
  const double v12 = stats::sample_covariance(num.what, den.what);
  // var of f(S1,S2)=S1/S2 with gradient (1/S2, -S1/S2^2)
  const double var = v11 / (s2 * s2) + ratio * ratio * v22 / (s2 * s2) - 2.0 * ratio * v12 / (s2 * s2);
  return make_ci(ratio, std::max(var, 0.0), tail.k, level);
}

} // namespace

EstimateWithCI kernel_tail_index(const SortedSample& sorted, std::size_t k, const KernelConfig& cfg, double level) {
  if (sorted.m != 1) throw value_error("kernel_tail_index: scalar covariate required");
  if (!(cfg.bandwidth > 0.0)) throw value_error("kernel_tail_index: bandwidth must be positive");
  const auto tail = tail_subsample(sorted, k);
  return ratio_with_delta_method(tail, cfg, level);
}

EstimateWithCI kernel_tail_index(const CensoredSample& sample, std::size_t k, const KernelConfig& cfg, double level) {
  return kernel_tail_index(sort_with_concomitants(sample), k, cfg, level);
}

std::vector<TailIndexPoint> tail_index_curve(const SortedSample& sorted, std::size_t k,
                                             const std::vector<double>& grid, double bandwidth, double level) {
  if (grid.empty()) throw size_error("tail_index_curve: empty grid");
  if (sorted.m != 1) throw value_error("tail_index_curve: scalar covariate required");
  const auto tail = tail_subsample(sorted, k);

  double h = bandwidth;
  if (bandwidth == kAutoBandwidth) {
    h = bandwidth_select(tail.x_star);
  } else if (!(bandwidth > 0.0)) {
    throw value_error("tail_index_curve: bandwidth must be positive or kAutoBandwidth");
  }

  std::vector<TailIndexPoint> out(grid.size());
  std::vector<std::exception_ptr> errs(grid.size());
  par::for_index(static_cast<std::int64_t>(grid.size()), [&](std::int64_t g) {
    try {
      out[g].center = grid[g];
      out[g].bandwidth = h;
      out[g].estimate = ratio_with_delta_method(tail, KernelConfig{grid[g], h}, level);
    } catch (...) {
      errs[g] = std::current_exception();
    }
  });
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

CategoryDistribution category_distribution(const SortedSample& sorted, std::size_t k,
                                           const std::vector<double>& categories) {
  if (categories.empty()) throw size_error("category_distribution: no categories");
  if (sorted.m != 1) throw value_error("category_distribution: scalar covariate code required");
  const auto tail = tail_subsample(sorted, k);
  const auto weights = km_weights(tail);

  CategoryDistribution out;
  double total = 0.0;
  for (double c : categories) {
    double mass = 0.0;
    for (std::size_t i = 0; i < tail.k; ++i)
      if (tail.x_star[i] == c) mass += weights.w[i];
    out.raw[c] = mass;
    total += mass;
  }
  if (!(total > 0.0)) throw degenerate_error("category_distribution: zero total mass over the given categories");
  for (const auto& [c, mass] : out.raw) out.normalized[c] = mass / total;
  return out;
}

} // namespace extkm
