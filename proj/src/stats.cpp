#include "extkm/stats.hpp"

#include "extkm/errors.hpp"
#include "extkm/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace extkm::stats {

namespace {
constexpr double inv_sqrt_2pi = 0.3989422804014327;
constexpr double sqrt2 = 1.4142135623730951;
} // namespace

double dnorm(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

double pnorm(double x) { return 0.5 * std::erfc(-x / sqrt2); }

double qnorm(double p) {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("qnorm: p must lie in (0,1)");
  // crude start, then Newton on pnorm; converges in a handful of steps
  double x;
  if (p < 0.02425 || p > 1.0 - 0.02425) {
    const double q = std::min(p, 1.0 - p);
    x = std::sqrt(-2.0 * std::log(q));
    x = x - (std::log(x) + std::log(2.0 * 3.141592653589793) / 2.0) / x;
    if (p < 0.5) x = -x;
  } else {
    x = (p - 0.5) * std::sqrt(2.0 * 3.141592653589793);
  }
  for (int it = 0; it < 8; ++it) {
    const double err = pnorm(x) - p;
    const double d = dnorm(x);
    if (d <= 0.0) break;
    const double step = err / d;
    x -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw size_error("mean: empty input");
  return par::pairwise_sum(v) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) throw size_error("sample_variance: need at least 2 values");
  const double m = mean(v);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - m;
    sq[i] = d * d;
  }
  return par::pairwise_sum(sq) / static_cast<double>(n - 1);
}

double sample_covariance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) throw size_error("sample_covariance: need matched spans of length >= 2");
  const double ma = mean(a), mb = mean(b);
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
  return par::pairwise_sum(prod) / static_cast<double>(n - 1);
}

double median(std::vector<double> v) { return quantile_type7(std::move(v), 0.5); }

double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw size_error("quantile_type7: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw domain_error("quantile_type7: p outside [0,1]");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ADTest anderson_darling_normal(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 8) throw size_error("anderson_darling_normal: need at least 8 values");
  std::vector<double> z(v.begin(), v.end());
  const double m = mean(z);
  const double s = std::sqrt(sample_variance(z));
  if (!(s > 0.0)) throw degenerate_error("anderson_darling_normal: zero variance");
  for (double& x : z) x = (x - m) / s;
  std::sort(z.begin(), z.end());

  const double dn = static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // clamp tail CDF values so logs stay finite
    const double lo = std::max(pnorm(z[i]), 1e-300);
    const double hi = std::max(1.0 - pnorm(z[n - 1 - i]), 1e-300);
    acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log(hi));
  }
  const double a2 = -dn - acc / dn;
  const double mod = a2 * (1.0 + 0.75 / dn + 2.25 / (dn * dn));

  // piecewise p-value approximation for the composite-normal case
  double p;
  if (mod < 0.2)
    p = 1.0 - std::exp(-13.436 + 101.14 * mod - 223.73 * mod * mod);
  else if (mod < 0.34)
    p = 1.0 - std::exp(-8.318 + 42.796 * mod - 59.938 * mod * mod);
  else if (mod < 0.6)
    p = std::exp(0.9177 - 4.279 * mod - 1.38 * mod * mod);
  else if (mod < 10.0)
    p = std::exp(1.2937 - 5.709 * mod + 0.0186 * mod * mod);
  else
    p = 0.0;
  return {mod, std::clamp(p, 0.0, 1.0)};
}

double ks_uniform(std::span<const double> v, double lo, double hi) {
  const std::size_t n = v.size();
  if (n == 0) throw size_error("ks_uniform: empty input");
  if (!(hi > lo)) throw domain_error("ks_uniform: need hi > lo");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::clamp((u[i] - lo) / (hi - lo), 0.0, 1.0);
    const double fn_lo = static_cast<double>(i) / static_cast<double>(n);
    const double fn_hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max({d, std::abs(f - fn_lo), std::abs(f - fn_hi)});
  }
  return d;
}

} // namespace extkm::stats
