#pragma once

#include <cmath>
#include <functional>

namespace extkm {

/// A covariate-indexed regularly varying family (scalar covariate).
/// log_survival is the primitive so that far-tail evaluations stay in
/// the log domain; survival() exponentiates it. karamata_delta follows
/// the magnitude convention: delta(x,u) -> 1/gamma(x) as u -> inf.
struct RVFamily {
  std::function<double(double)> gamma;                  // tail index gamma(x)
  std::function<double(double, double)> log_survival;   // log P(Y > y | X = x)
  std::function<double(double, double)> tail_quantile;  // U(x, t), t > 1
  std::function<double(double, double)> karamata_c;     // c(x, y)
  std::function<double(double)> karamata_c_limit;       // c(x) = lim_y c(x, y)
  std::function<double(double, double)> karamata_delta; // delta(x, u)
  std::function<double(double, double)> eta;            // eta_x(u), u > 1
  std::function<double(double, double)> second_order_a; // a_{X=x}(t)
  std::function<double(double)> rho;                    // second-order index, <= 0
  std::function<double(double, double)> slowly_varying; // L_{Y|X=x}(y)

  double survival(double x, double y) const { return std::exp(log_survival(x, y)); }
};

/// Burr family: survival (1 + y^tau(x))^(-kappa(x)), tail index
/// 1/(kappa tau), with all Karamata and second-order components in
/// closed form.
RVFamily burr_family(std::function<double(double)> kappa, std::function<double(double)> tau);
RVFamily burr_family(double kappa, double tau);

/// Exact Pareto family on [1, inf): survival y^(-1/gamma(x)). All
/// regular-variation remainders vanish identically.
RVFamily pareto_family(std::function<double(double)> gamma);
RVFamily pareto_family(double gamma);

/// Burr CDF F(y) = 1 - (1 + y^tau)^(-kappa) for y >= 0.
double burr_cdf(double kappa, double tau, double y);

/// Burr tail quantile U(t) = (t^(1/kappa) - 1)^(1/tau), t > 1.
double burr_quantile(double kappa, double tau, double t);

struct KaramataComponents {
  double c = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double a = 0.0;
  double rho = 0.0;
};

/// Evaluates (c, delta, eta, a, rho) of the family at covariate x and
/// scale v (interpreted as y for c, u for delta/eta, t for a).
/// Throws domain_error at the eta singularity u = 1.
KaramataComponents karamata_components(const RVFamily& family, double x, double v);

} // namespace extkm
