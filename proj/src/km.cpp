#include "extkm/km.hpp"

#include "extkm/errors.hpp"
#include "extkm/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace extkm {

namespace {

// log of the censored-jump factors: logg0[i] = sum over censored j > i
// of log((j+1)/j), zero-based. exp(logg0[i]) is both gamma0_hat(V_i)
// and k * W_ik / delta_i.
std::vector<double> log_g0(const TailSubsample& tail) {
  const std::size_t k = tail.k;
  std::vector<double> logg0(k, 0.0);
  for (std::size_t i = k - 1; i-- > 0;) {
    const std::size_t j = i + 1;
    logg0[i] = logg0[j];
    if (tail.delta_star[j] == 0)
      logg0[i] += std::log(static_cast<double>(j + 1) / static_cast<double>(j));
  }
  return logg0;
}

std::vector<double> eval_phi(const TailSubsample& tail, const PhiFunction& phi) {
  const std::size_t k = tail.k;
  std::vector<double> vals(k);
  for (std::size_t i = 0; i < k; ++i) {
    vals[i] = phi(tail.covariates(i), tail.v[i]);
    if (!std::isfinite(vals[i]))
      throw numeric_error("phi evaluated to a non-finite value at tail index " + std::to_string(i + 1));
    if (phi.envelope) {
      const double bound = phi.envelope(tail.v[i]);
      if (std::abs(vals[i]) > bound + 1e-12 * (1.0 + std::abs(bound)))
        throw value_error("phi exceeds its envelope at tail index " + std::to_string(i + 1));
    }
  }
  return vals;
}

} // namespace

KMWeights km_weights(const TailSubsample& tail) {
  const std::size_t k = tail.k;
  if (k == 0) throw size_error("km_weights: empty tail subsample");
  const auto logg0 = log_g0(tail);
  KMWeights out;
  out.w.resize(k);
  const double inv_k = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i)
    out.w[i] = tail.delta_star[i] ? inv_k * std::exp(logg0[i]) : 0.0;
  return out;
}

double ekmi_cdf(const TailSubsample& tail, const KMWeights& weights, std::span<const double> x, double y) {
  if (x.size() != static_cast<std::size_t>(tail.m)) throw value_error("ekmi_cdf: covariate dimension mismatch");
  if (!(y >= 0.0)) throw domain_error("ekmi_cdf: y must be nonnegative");
  double acc = 0.0;
  for (std::size_t i = 0; i < tail.k; ++i) {
    if (tail.v[i] > y) continue;
    const auto xi = tail.covariates(i);
    bool in = true;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (xi[j] > x[j]) {
        in = false;
        break;
      }
    if (in) acc += weights.w[i];
  }
  return acc;
}

double ekmi_integral(const TailSubsample& tail, const KMWeights& weights, const PhiFunction& phi) {
  const auto phis = eval_phi(tail, phi);
  double acc = 0.0;
  for (std::size_t i = 0; i < tail.k; ++i) acc += weights.w[i] * phis[i];
  return acc;
}

GammaHat empirical_gamma_functions(const TailSubsample& tail, const PhiFunction& phi, double y) {
  if (!(y >= 1.0)) throw domain_error("empirical_gamma_functions: y must be >= 1");
  const std::size_t k = tail.k;
  const auto logg0 = log_g0(tail);

  GammaHat out;

  // gamma0: product of r/(r-1) over censored points strictly below y
  double lg = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (tail.delta_star[j] != 0 || !(tail.v[j] < y)) continue;
    const double r = static_cast<double>(j + 1); // rank from top
    if (r == 1.0) {
      out.gamma0 = std::numeric_limits<double>::infinity();
      lg = std::numeric_limits<double>::infinity();
      break;
    }
    lg += std::log(r / (r - 1.0));
  }
  if (std::isfinite(lg)) out.gamma0 = std::exp(lg);

  // gamma1: mean of phi*gamma0 over uncensored points above y, scaled by
  // 1/(1 - H_k(y)); zero when nothing lies above y
  std::size_t above = 0;
  double acc1 = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!(tail.v[j] > y)) continue;
    ++above;
    if (tail.delta_star[j] == 1) acc1 += phi(tail.covariates(j), tail.v[j]) * std::exp(logg0[j]);
  }
  out.gamma1 = (above == 0) ? 0.0 : acc1 / static_cast<double>(above);

  // gamma2: double sum over uncensored j and censored l below min(y, V_j)
  double acc2 = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (tail.delta_star[j] != 1) continue;
    const double cap = std::min(y, tail.v[j]);
    double inner = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      if (tail.delta_star[l] != 0 || !(tail.v[l] < cap)) continue;
      const double r = static_cast<double>(l + 1);
      inner += 1.0 / (r * r);
    }
    if (inner != 0.0) acc2 += phi(tail.covariates(j), tail.v[j]) * std::exp(logg0[j]) * inner;
  }
  out.gamma2 = acc2;
  return out;
}

PluginTerms plugin_terms(const TailSubsample& tail, const PhiFunction& phi) {
  const std::size_t k = tail.k;
  if (k == 0) throw size_error("plugin_terms: empty tail subsample");
  const auto logg0 = log_g0(tail);
  const auto phis = eval_phi(tail, phi);

  std::vector<double> g0(k), dphig0(k);
  for (std::size_t i = 0; i < k; ++i) {
    g0[i] = std::exp(logg0[i]);
    dphig0[i] = tail.delta_star[i] ? phis[i] * g0[i] : 0.0;
  }

  // prefix/suffix structures make all k evaluations O(k)
  std::vector<double> p1(k, 0.0); // sum of dphig0 over j < i
  for (std::size_t i = 1; i < k; ++i) p1[i] = p1[i - 1] + dphig0[i - 1];

  std::vector<double> q(k, 0.0); // sum over censored l > i of 1/rank^2
  for (std::size_t i = k - 1; i-- > 0;) {
    const std::size_t j = i + 1;
    q[i] = q[j];
    if (tail.delta_star[j] == 0) {
      const double r = static_cast<double>(j + 1);
      q[i] += 1.0 / (r * r);
    }
  }

  std::vector<double> c1(k, 0.0); // inclusive prefix of dphig0
  c1[0] = dphig0[0];
  for (std::size_t i = 1; i < k; ++i) c1[i] = c1[i - 1] + dphig0[i];

  std::vector<double> c2(k, 0.0); // suffix of dphig0 * q over j > i
  for (std::size_t i = k - 1; i-- > 0;) c2[i] = c2[i + 1] + dphig0[i + 1] * q[i + 1];

  PluginTerms out;
  out.what.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double g1 = (i == 0) ? 0.0 : p1[i] / static_cast<double>(i);
    const double g2 = q[i] * c1[i] + c2[i];
    out.what[i] = dphig0[i] + (tail.delta_star[i] ? 0.0 : g1) - g2;
  }
  out.integral = c1[k - 1] / static_cast<double>(k);
  return out;
}

double plug_in_variance(const TailSubsample& tail, const PhiFunction& phi) {
  if (tail.k < 2) throw size_error("plug_in_variance: need k >= 2");
  const auto terms = plugin_terms(tail, phi);
  return stats::sample_variance(terms.what);
}

EstimateWithCI make_ci(double value, double variance_hat, std::size_t k, double level) {
  if (!(level > 0.0 && level < 1.0)) throw domain_error("confidence level must lie in (0,1)");
  if (variance_hat < 0.0) throw numeric_error("negative variance estimate");
  EstimateWithCI out;
  out.value = value;
  out.level = level;
  out.std_error = std::sqrt(variance_hat / static_cast<double>(k));
  const double q = stats::qnorm(0.5 + level / 2.0);
  out.lower = value - q * out.std_error;
  out.upper = value + q * out.std_error;
  return out;
}

EstimateWithCI ekmi_confidence_interval(const TailSubsample& tail, const PhiFunction& phi, double level) {
  if (tail.k < 2) throw size_error("ekmi_confidence_interval: need k >= 2");
  const auto terms = plugin_terms(tail, phi);
  return make_ci(terms.integral, stats::sample_variance(terms.what), tail.k, level);
}

} // namespace extkm
