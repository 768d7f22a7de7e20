#pragma once

#include <span>
#include <vector>

namespace extkm::stats {

/// Standard normal density.
double dnorm(double x);

/// Standard normal CDF, computed via erfc.
double pnorm(double x);

/// Standard normal quantile. Newton-refined to full double precision.
/// Valid for p in (0,1).
double qnorm(double p);

double mean(std::span<const double> v);

/// Sample variance with denominator n-1. Requires n >= 2.
double sample_variance(std::span<const double> v);

/// Sample covariance with denominator n-1.
double sample_covariance(std::span<const double> a, std::span<const double> b);

double median(std::vector<double> v);

/// Type-7 quantile (linear interpolation of order statistics),
/// the convention used by the default quantile in most stats software.
double quantile_type7(std::vector<double> v, double p);

struct ADTest {
  double statistic = 0.0; // A^2 with the small-sample modification
  double p_value = 1.0;
};

/// Anderson-Darling test of composite normality (mean and variance
/// estimated from the data), with the Stephens correction and the
/// standard p-value approximation.
ADTest anderson_darling_normal(std::span<const double> v);

/// Kolmogorov-Smirnov statistic sup|F_n - F| against U(lo,hi).
double ks_uniform(std::span<const double> v, double lo, double hi);

} // namespace extkm::stats
