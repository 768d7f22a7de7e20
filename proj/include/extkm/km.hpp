#pragma once

#include "extkm/phi.hpp"
#include "extkm/sample.hpp"

#include <span>
#include <vector>

namespace extkm {

/// Product-limit weights on the tail subsample, index 0 = largest
/// observation. Nonnegative, sum <= 1, zero at censored points.
struct KMWeights {
  std::vector<double> w;
};

struct EstimateWithCI {
  double value = 0.0;
  double std_error = 0.0;
  double level = 0.95;
  double lower = 0.0;
  double upper = 0.0;
};

/// Kaplan-Meier jumps W_ik of the product-limit estimator restricted to
/// the top-k rescaled sample. The censored-jump factors are accumulated
/// as exponentiated log-sums; with no censoring the log-sum is empty
/// and every weight is exactly 1/k.
KMWeights km_weights(const TailSubsample& tail);

/// Estimated joint tail CDF at (x, y): sum of weights of points with
/// X*_i <= x componentwise and V*_i <= y.
double ekmi_cdf(const TailSubsample& tail, const KMWeights& weights, std::span<const double> x, double y);

/// The product-limit integral S_{k,n}(phi) = sum_i W_ik phi(X*_i, V*_i).
/// phi is evaluated at V*_i = Z_{n-i+1,n}/Z_{n-k,n}. Throws
/// numeric_error naming the offending index when phi is non-finite at a
/// sample point.
double ekmi_integral(const TailSubsample& tail, const KMWeights& weights, const PhiFunction& phi);

struct GammaHat {
  double gamma0 = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

/// Empirical tail-counterpart plug-ins of the gamma functions at y.
/// The left limit 1 - H_k(v-) is taken as rank-from-top over k, so the
/// factor at a censored point of rank r is r/(r-1). When no point lies
/// above y, gamma1 is 0 by convention (empty upper set).
GammaHat empirical_gamma_functions(const TailSubsample& tail, const PhiFunction& phi, double y);

/// Per-observation terms of the exchangeable-sum decomposition with
/// empirical plug-ins:
///   What_i = phi_i g0_i delta_i + g1(V_i) (1-delta_i) - g2(V_i).
/// Their sample variance estimates k * Var(S_{k,n}(phi)).
struct PluginTerms {
  std::vector<double> what;
  double integral = 0.0; // S_{k,n}(phi)
};
PluginTerms plugin_terms(const TailSubsample& tail, const PhiFunction& phi);

/// Sample variance (denominator k-1) of the plug-in terms. Requires k >= 2.
double plug_in_variance(const TailSubsample& tail, const PhiFunction& phi);

/// Central-limit confidence interval for S_{k,n}(phi):
/// value +- qnorm((1+level)/2) * sqrt(sigma2_hat / k).
EstimateWithCI ekmi_confidence_interval(const TailSubsample& tail, const PhiFunction& phi, double level);

/// Gaussian interval around a point estimate given the plug-in variance
/// of sqrt(k)(S - center).
EstimateWithCI make_ci(double value, double variance_hat, std::size_t k, double level);

} // namespace extkm
