#pragma once

#include "extkm/phi.hpp"
#include "extkm/rv_family.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace extkm {

/// A law for a scalar covariate: either point masses or a density on
/// [lo, hi]. quad_breakpoints carries known peak locations so interval
/// probabilities integrate accurately across sharp posteriors.
struct CovariateLaw {
  struct Atom {
    double x = 0.0;
    double mass = 0.0;
  };
  std::vector<Atom> atoms;
  std::function<double(double)> density;
  double lo = 0.0, hi = 0.0;
  std::vector<double> quad_breakpoints;

  bool discrete() const { return !atoms.empty(); }
  double prob_interval(double a, double b) const; // P(X in (a, b])
  double total_mass() const;

  static CovariateLaw uniform(double lo, double hi);
  static CovariateLaw point_masses(std::vector<Atom> atoms);
};

/// The t -> infinity law of the tail counterpart: covariate law F_X^o,
/// conditional Pareto index gamma_F(x) on its support, and the
/// censoring tail index (infinity = uncensored limit).
struct LimitModel {
  CovariateLaw fx;
  std::function<double(double)> gamma_F;
  double gamma_U = 1.0;
  double gamma_G = std::numeric_limits<double>::infinity();

  bool censored() const { return std::isfinite(gamma_G); }
};

/// Limit model of the simulation-study Burr configuration: point masses
/// 1/2 at x = 2 and x = 4, common index gamma_F(2), censoring index 14.
LimitModel section4_limit_model();

/// Law of X given Y > t under the family, starting from the prior `fx`.
/// Finite t: the exact conditional law (log-domain reweighting).
/// t = infinity: the limit law. Discrete priors restrict to the argmax
/// set of gamma and reweight by the numeric slowly-varying limits;
/// continuous priors with a flat gamma reweight the density the same
/// way; continuous priors with isolated argmax points return point
/// masses obtained from finite-t window probabilities along a doubling
/// t-sequence with Aitken extrapolation.
CovariateLaw covariate_limit_distribution(const RVFamily& family, const CovariateLaw& fx, double t);

/// S_o(phi) = integral of phi against the limit law: outer integral
/// over F_X^o, inner Pareto(gamma_F(x)) integral truncated where the
/// tail falls below 1e-12 and extended until blocks stop contributing.
/// When an envelope is supplied its integrability is verified first.
double limit_functional(const PhiFunction& phi, const LimitModel& model);

enum class OracleMethod { quadrature, monte_carlo };

struct VarianceEstimate {
  double sigma2 = 0.0;
  double std_error = 0.0; // Monte Carlo only; 0 for quadrature
  double mean = 0.0;      // E W, equals the limit functional
};

/// Var(W_o) for W_o = phi(X,V) gamma0(V) delta + gamma1(V)(1-delta)
/// - gamma2(V) under the limit model, with gamma0(v) = v^{1/gamma_G}
/// and gamma1, gamma2 from the limit tail-counterpart measures.
/// Quadrature tabulates the gamma functions on a log grid and
/// integrates; monte_carlo draws (X,Y,C) directly with `reps`
/// replicates and reports a standard error for sigma2.
VarianceEstimate asymptotic_variance_oracle(const PhiFunction& phi, const LimitModel& model, OracleMethod method,
                                            std::size_t reps = 0, std::uint64_t seed = 1);

/// Moment condition on the envelope: finiteness of
/// int_1^inf envelope(w)^{2+eps} w^{alpha(eps)} dw with
/// alpha(eps) = 1/gamma_G - 1/gamma_U - 1 + eps for some eps > 0.
bool condition1_moment_check(const PhiFunction& phi, double gamma_G, double gamma_U);

/// Second-order remainder shape: log y at rho = 0, (y^rho - 1)/rho
/// otherwise.
double h_rho(double rho, double y);

/// Bias functional: integral over F_X^o of
///   lambda(x) * C(gamma_F(x), rho(x)),
///   C = int_1^inf [x] dphi/dy (x,y) h_rho(y^{1/gamma}) dF_{Y|X=x}^o(y),
/// with h_0 = log and h_rho(y) = (y^rho - 1)/rho otherwise. The leading
/// x factor inside C can be dropped via include_x_factor.
double second_order_bias(const PhiFunction& phi, const LimitModel& model, const RVFamily& family,
                         const std::function<double(double)>& lambda, bool include_x_factor = true);

} // namespace extkm
