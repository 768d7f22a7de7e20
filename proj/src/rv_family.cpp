#include "extkm/rv_family.hpp"

#include "extkm/errors.hpp"

#include <cmath>

namespace extkm {

namespace {

// log(1 + y^tau) without overflow for large y
double log1p_pow(double y, double tau) {
  const double t = tau * std::log(y);
  if (t > 500.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

} // namespace

double burr_cdf(double kappa, double tau, double y) {
  if (!(kappa > 0.0 && tau > 0.0)) throw domain_error("burr_cdf: kappa and tau must be positive");
  if (y < 0.0) return 0.0;
  if (y == 0.0) return 0.0;
  return -std::expm1(-kappa * log1p_pow(y, tau));
}

double burr_quantile(double kappa, double tau, double t) {
  if (!(kappa > 0.0 && tau > 0.0)) throw domain_error("burr_quantile: kappa and tau must be positive");
  if (!(t > 1.0)) throw domain_error("burr_quantile: t must exceed 1");
  // U(t) = (t^(1/kappa) - 1)^(1/tau), evaluated in the log domain
  const double lt = std::log(t) / kappa;
  const double log_inner = lt + std::log1p(-std::exp(-lt));
  return std::exp(log_inner / tau);
}

RVFamily burr_family(std::function<double(double)> kappa, std::function<double(double)> tau) {
  RVFamily f;
  f.gamma = [kappa, tau](double x) { return 1.0 / (kappa(x) * tau(x)); };
  f.log_survival = [kappa, tau](double x, double y) {
    if (y <= 0.0) return 0.0;
    return -kappa(x) * log1p_pow(y, tau(x));
  };
  f.tail_quantile = [kappa, tau](double x, double t) { return burr_quantile(kappa(x), tau(x), t); };
  f.karamata_c = [kappa](double x, double) { return std::exp2(-kappa(x)); };
  f.karamata_c_limit = [kappa](double x) { return std::exp2(-kappa(x)); };
  f.karamata_delta = [kappa, tau](double x, double u) {
    // kappa tau u^tau / (1 + u^tau), stable form
    return kappa(x) * tau(x) / (1.0 + std::pow(u, -tau(x)));
  };
  f.eta = [kappa, tau](double x, double u) {
    if (!(u > 1.0)) throw domain_error("eta: u must exceed 1");
    return 1.0 / (kappa(x) * tau(x) * (1.0 - std::pow(u, -1.0 / kappa(x))));
  };
  f.rho = [kappa](double x) { return -1.0 / kappa(x); };
  f.second_order_a = [kappa, tau](double x, double t) {
    if (!(t > 1.0)) throw domain_error("second_order_a: t must exceed 1");
    const double ratio = 1.0 / (1.0 - std::pow(t, -1.0 / kappa(x)));
    return (-1.0 / kappa(x)) * (1.0 - std::pow(ratio, 1.0 / tau(x)));
  };
  f.slowly_varying = [kappa, tau](double x, double y) {
    // survival * y^{1/gamma} = (1 + y^{-tau})^{-kappa}
    return std::pow(1.0 + std::pow(y, -tau(x)), -kappa(x));
  };
  return f;
}

RVFamily burr_family(double kappa, double tau) {
  return burr_family([kappa](double) { return kappa; }, [tau](double) { return tau; });
}

RVFamily pareto_family(std::function<double(double)> gamma) {
  RVFamily f;
  f.gamma = gamma;
  f.log_survival = [gamma](double x, double y) {
    if (y <= 1.0) return 0.0;
    return -std::log(y) / gamma(x);
  };
  f.tail_quantile = [gamma](double x, double t) {
    if (!(t > 1.0)) throw domain_error("tail_quantile: t must exceed 1");
    return std::pow(t, gamma(x));
  };
  f.karamata_c = [](double, double) { return 1.0; };
  f.karamata_c_limit = [](double) { return 1.0; };
  f.karamata_delta = [gamma](double x, double) { return 1.0 / gamma(x); };
  f.eta = [gamma](double x, double u) {
    if (!(u > 1.0)) throw domain_error("eta: u must exceed 1");
    return gamma(x);
  };
  f.rho = [](double) { return 0.0; };
  f.second_order_a = [](double, double) { return 0.0; };
  f.slowly_varying = [](double, double) { return 1.0; };
  return f;
}

RVFamily pareto_family(double gamma) {
  return pareto_family([gamma](double) { return gamma; });
}

KaramataComponents karamata_components(const RVFamily& family, double x, double v) {
  KaramataComponents out;
  out.c = family.karamata_c(x, v);
  out.delta = family.karamata_delta(x, v);
  if (v <= 1.0) throw domain_error("karamata_components: eta is singular at u <= 1");
  out.eta = family.eta(x, v);
  out.a = family.second_order_a(x, v);
  out.rho = family.rho(x);
  return out;
}

} // namespace extkm
