#include "extkm/errors.hpp"
#include "extkm/estimators.hpp"
#include "extkm/limit_model.hpp"
#include "extkm/rv_family.hpp"
#include "extkm/simulation.hpp"
#include "extkm/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace extkm;

namespace {

const double inf = std::numeric_limits<double>::infinity();

RVFamily paper_family() {
  return burr_family([](double) { return 1.0; }, [](double x) { return 1.0 / gamma_F_profile(x); });
}

LimitModel pareto_limit(double gamma_f, double gamma_g) {
  LimitModel lm;
  lm.fx = CovariateLaw::point_masses({{3.0, 1.0}});
  lm.gamma_F = [gamma_f](double) { return gamma_f; };
  lm.gamma_U = gamma_f;
  lm.gamma_G = gamma_g;
  return lm;
}

} // namespace

TEST_CASE("section-4 limit model matches the profile peak") {
  const auto model = section4_limit_model();
  CHECK(model.gamma_U == doctest::Approx(gamma_F_profile(2.0)).epsilon(1e-12));
  CHECK(model.gamma_U == doctest::Approx(1.29789).epsilon(1e-5));
  CHECK(model.gamma_G == 14.0);
  REQUIRE(model.fx.atoms.size() == 2);
  CHECK(model.fx.atoms[0].mass == 0.5);
}

TEST_CASE("covariate law queries") {
  const auto uniform = CovariateLaw::uniform(1.0, 5.0);
  CHECK(uniform.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(uniform.prob_interval(1.0, 3.0) == doctest::Approx(0.5).epsilon(1e-10));

  const auto atoms = CovariateLaw::point_masses({{2.0, 0.25}, {4.0, 0.75}});
  CHECK(atoms.prob_interval(1.9, 2.1) == 0.25);
  CHECK(atoms.prob_interval(0.0, 10.0) == 1.0);
  CHECK(atoms.total_mass() == 1.0);
}

TEST_CASE("finite-t covariate law: mass one and monotone concentration") {
  const auto fam = paper_family();
  const auto prior = CovariateLaw::uniform(1.0, 5.0);
  double prev = 0.0;
  for (double t : {1e2, 1e3, 1e4, 1e6}) {
    const auto law = covariate_limit_distribution(fam, prior, t);
    CHECK(law.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
    const double p = law.prob_interval(1.8, 2.2);
    CHECK(p > prev); // concentrates toward the argmax windows
    prev = p;
  }
  CHECK(prev > 0.49);
}

TEST_CASE("finite-t quadrature values at 1e4 and 1e6") {
  const auto fam = paper_family();
  const auto prior = CovariateLaw::uniform(1.0, 5.0);
  CHECK(covariate_limit_distribution(fam, prior, 1e4).prob_interval(1.8, 2.2) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(covariate_limit_distribution(fam, prior, 1e4).prob_interval(1.8, 2.2) - 0.5) < 0.05);
  CHECK(std::abs(covariate_limit_distribution(fam, prior, 1e6).prob_interval(1.8, 2.2) - 0.5) < 0.01);
}

TEST_CASE("limit law collapses onto the argmax points") {
  const auto law = covariate_limit_distribution(paper_family(), CovariateLaw::uniform(1.0, 5.0), inf);
  REQUIRE(law.atoms.size() == 2);
  CHECK(law.atoms[0].x == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(law.atoms[1].x == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(std::abs(law.atoms[0].mass - 0.5) < 1e-3);
  CHECK(std::abs(law.atoms[1].mass - 0.5) < 1e-3);
}

TEST_CASE("constant gamma keeps the prior") {
  const auto fam = pareto_family(0.6);
  const auto prior = CovariateLaw::uniform(1.0, 5.0);
  const auto law = covariate_limit_distribution(fam, prior, inf);
  CHECK(!law.discrete());
  for (double a = 1.0; a < 5.0; a += 0.7)
    CHECK(law.prob_interval(1.0, a) == doctest::Approx(prior.prob_interval(1.0, a)).epsilon(1e-8));
}

TEST_CASE("argmax set of positive length restricts the prior") {
  // plateau of the tail index over [2, 3]
  const auto fam = pareto_family([](double x) {
    const double dist = x < 2.0 ? 2.0 - x : (x > 3.0 ? x - 3.0 : 0.0);
    return 0.7 - 0.2 * std::min(dist, 1.0);
  });
  const auto law = covariate_limit_distribution(fam, CovariateLaw::uniform(1.0, 5.0), inf);
  CHECK(!law.discrete());
  CHECK(law.prob_interval(1.99, 3.01) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(law.prob_interval(2.0, 2.5) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(law.total_mass() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("discrete prior reweights by the slowly varying limits") {
  // scaled Pareto: survival (y/s(x))^{-1/gamma}, so L-limit is s(x)^{1/gamma}
  RVFamily fam = pareto_family(0.5);
  fam.log_survival = [](double x, double y) {
    const double scale = (x < 3.0) ? 1.0 : 2.0;
    if (y <= scale) return 0.0;
    return -2.0 * (std::log(y) - std::log(scale));
  };
  const auto prior = CovariateLaw::point_masses({{2.0, 0.5}, {4.0, 0.5}});
  const auto law = covariate_limit_distribution(fam, prior, inf);
  REQUIRE(law.atoms.size() == 2);
  // masses proportional to {1, 2^2} = {1, 4}
  CHECK(law.atoms[0].mass == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(law.atoms[1].mass == doctest::Approx(0.8).epsilon(1e-6));

  // atoms with strictly smaller gamma drop out entirely
  RVFamily mixed = pareto_family([](double x) { return x < 3.0 ? 0.5 : 0.9; });
  const auto only_max = covariate_limit_distribution(mixed, prior, inf);
  REQUIRE(only_max.atoms.size() == 1);
  CHECK(only_max.atoms[0].x == 4.0);
  CHECK(only_max.atoms[0].mass == 1.0);
}

TEST_CASE("limit functional") {
  const auto model = section4_limit_model();
  CHECK(limit_functional(phi_constant(1.0), model) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(limit_functional(phi_indicator_region(Region(1.8, 2.2)), model) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(limit_functional(phi_log_y(), model) == doctest::Approx(model.gamma_U).epsilon(1e-6));

  // continuous covariate law with constant gamma
  LimitModel cont;
  cont.fx = CovariateLaw::uniform(1.0, 5.0);
  cont.gamma_F = [](double) { return 0.5; };
  cont.gamma_U = 0.5;
  CHECK(limit_functional(phi_indicator_y_le(2.0), cont) == doctest::Approx(0.75).epsilon(1e-8));
}

TEST_CASE("condition-1 moment check") {
  CHECK(condition1_moment_check(phi_indicator_y_le(2.0), 1.0, 0.5));
  CHECK(condition1_moment_check(phi_log_y(), 0.75, 0.5));
  // gamma_G = gamma_F^U makes alpha(eps) = -1 + eps: divergent for a unit envelope
  CHECK(!condition1_moment_check(phi_indicator_y_le(2.0), 0.5, 0.5));
  PhiFunction no_env;
  no_env.value = [](std::span<const double>, double) { return 1.0; };
  CHECK_THROWS_AS(condition1_moment_check(no_env, 1.0, 0.5), capability_error);
}

TEST_CASE("variance oracle closed forms and reductions") {
  const auto phi = phi_indicator_y_le(2.0);

  // no censoring: Bernoulli variance p(1-p) with p = 1 - 2^{-2}
  const auto unc = asymptotic_variance_oracle(phi, pareto_limit(0.5, inf), OracleMethod::quadrature);
  CHECK(unc.sigma2 == doctest::Approx(0.1875).epsilon(1e-7));
  CHECK(unc.mean == doctest::Approx(0.75).epsilon(1e-9));

  const auto flat = asymptotic_variance_oracle(phi_constant(4.0), pareto_limit(0.5, inf), OracleMethod::quadrature);
  CHECK(flat.sigma2 == doctest::Approx(0.0).epsilon(1e-10));

  // inadmissible integrand
  CHECK_THROWS_AS(asymptotic_variance_oracle(phi, pareto_limit(0.5, 0.5), OracleMethod::quadrature), domain_error);
}

TEST_CASE("variance oracle: quadrature and Monte Carlo agree") {
  const auto phi = phi_indicator_y_le(2.0);
  const auto model = pareto_limit(0.5, 1.0);
  const auto quad = asymptotic_variance_oracle(phi, model, OracleMethod::quadrature);
  const auto mc = asymptotic_variance_oracle(phi, model, OracleMethod::monte_carlo, 400000, 17);
  CHECK(mc.std_error > 0.0);
  CHECK(std::abs(quad.sigma2 - mc.sigma2) < 3.0 * mc.std_error);
  CHECK(quad.mean == doctest::Approx(0.75).epsilon(1e-7));
  CHECK_THROWS_AS(asymptotic_variance_oracle(phi, model, OracleMethod::monte_carlo, 1, 17), size_error);
}

TEST_CASE("second-order bias functional") {
  const auto model = pareto_limit(1.0, inf);
  const auto burr = burr_family(1.0, 1.0); // rho = -1

  CHECK(h_rho(0.0, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h_rho(-1.0, 4.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(burr.rho(2.0) == -1.0);

  const auto zero = second_order_bias(phi_log_y(), model, burr, [](double) { return 0.0; });
  CHECK(zero == 0.0);

  // phi = log y, rho = -1, gamma = 1, no x factor:
  // C = int (1/y)(1 - y^{-1}) y^{-2} dy = 1/2 - 1/3 = 1/6
  const auto c_val = second_order_bias(phi_log_y(), model, burr, [](double) { return 1.0; }, false);
  CHECK(c_val == doctest::Approx(1.0 / 6.0).epsilon(1e-8));
  // with the leading x factor the single atom at x = 3 scales it
  const auto c_x = second_order_bias(phi_log_y(), model, burr, [](double) { return 1.0; }, true);
  CHECK(c_x == doctest::Approx(0.5).epsilon(1e-8));

  PhiFunction no_dy;
  no_dy.value = [](std::span<const double>, double y) { return std::log(y); };
  CHECK_THROWS_AS(second_order_bias(no_dy, model, burr, [](double) { return 1.0; }), capability_error);
}
