#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

namespace extkm {

/// Integrand phi(x, y) for product-limit integrals, with y >= 1 the
/// rescaled tail value and x the covariate tuple. The optional envelope
/// bounds |phi(x,y)| <= envelope(y) uniformly in x; the optional dy
/// evaluator is the partial derivative in y (needed for the
/// second-order bias functional only).
struct PhiFunction {
  std::function<double(std::span<const double>, double)> value;
  std::function<double(double)> envelope;
  std::function<double(std::span<const double>, double)> dy;

  double operator()(std::span<const double> x, double y) const { return value(x, y); }
};

PhiFunction phi_constant(double c);

/// phi(x,y) = log y. Envelope log y, derivative 1/y.
PhiFunction phi_log_y();

/// phi(x,y) = 1{y <= y0}. Envelope 1.
PhiFunction phi_indicator_y_le(double y0);

/// Gaussian kernel in the first covariate coordinate:
/// dnorm((x - center)/bandwidth), optionally times log y.
PhiFunction phi_gaussian_kernel(double center, double bandwidth, bool times_log_y = false);

namespace detail {
inline double std_normal_density(double t) { return 0.3989422804014327 * std::exp(-0.5 * t * t); }
} // namespace detail

inline PhiFunction phi_constant(double c) {
  PhiFunction f;
  f.value = [c](std::span<const double>, double) { return c; };
  f.envelope = [c](double) { return std::abs(c); };
  f.dy = [](std::span<const double>, double) { return 0.0; };
  return f;
}

inline PhiFunction phi_log_y() {
  PhiFunction f;
  f.value = [](std::span<const double>, double y) { return std::log(y); };
  f.envelope = [](double y) { return std::log(std::max(y, 1.0)); };
  f.dy = [](std::span<const double>, double y) { return 1.0 / y; };
  return f;
}

inline PhiFunction phi_indicator_y_le(double y0) {
  PhiFunction f;
  f.value = [y0](std::span<const double>, double y) { return y <= y0 ? 1.0 : 0.0; };
  f.envelope = [](double) { return 1.0; };
  return f;
}

inline PhiFunction phi_gaussian_kernel(double center, double bandwidth, bool times_log_y) {
  PhiFunction f;
  f.value = [center, bandwidth, times_log_y](std::span<const double> x, double y) {
    const double kern = detail::std_normal_density((x[0] - center) / bandwidth);
    return times_log_y ? kern * std::log(y) : kern;
  };
  const double peak = detail::std_normal_density(0.0);
  if (times_log_y) {
    f.envelope = [peak](double y) { return peak * std::log(std::max(y, 1.0)); };
    f.dy = [center, bandwidth](std::span<const double> x, double y) {
      return detail::std_normal_density((x[0] - center) / bandwidth) / y;
    };
  } else {
    f.envelope = [peak](double) { return peak; };
    f.dy = [](std::span<const double>, double) { return 0.0; };
  }
  return f;
}

} // namespace extkm
