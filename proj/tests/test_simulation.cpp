#include "extkm/errors.hpp"
#include "extkm/km.hpp"
#include "extkm/estimators.hpp"
#include "extkm/rv_family.hpp"
#include "extkm/simulation.hpp"
#include "extkm/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace extkm;

TEST_CASE("gamma profiles at the named points") {
  CHECK(gamma_F_profile(2.0) == doctest::Approx(0.5 + 2.0 * stats::dnorm(0.0)).epsilon(1e-12));
  CHECK(gamma_F_profile(2.0) == doctest::Approx(1.29789).epsilon(1e-5));
  CHECK(gamma_F_profile(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gamma_F_profile(4.0) == doctest::Approx(gamma_F_profile(2.0)).epsilon(1e-12));
  CHECK(gamma_C1_profile(2.0) == doctest::Approx(0.75 + 3.0 * stats::dnorm(0.0)).epsilon(1e-12));
  CHECK(burr_paper_config(10, 1).gamma_C2 == 14.0);
  CHECK(burr_paper_config(10, 1).cutoff == 100.0);
}

TEST_CASE("sample_model determinism and shape") {
  const auto cfg = burr_paper_config(5000, 99);
  const auto a = sample_model(cfg);
  const auto b = sample_model(cfg);
  REQUIRE(a.size() == 5000);
  CHECK(a.z == b.z);
  CHECK(a.delta == b.delta);
  CHECK(a.x == b.x);

  const auto c = sample_model(burr_paper_config(5000, 100));
  CHECK(a.z != c.z);

  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a.z[i] > 0.0);
    REQUIRE(a.x[i] >= 1.0);
    REQUIRE(a.x[i] <= 5.0);
  }
}

TEST_CASE("covariates are uniform and the Burr round trip holds") {
  const auto cfg = burr_paper_config(100000, 31);
  const auto sample = sample_model(cfg);
  CHECK(stats::ks_uniform(sample.x, 1.0, 5.0) < 1.63 / std::sqrt(100000.0));

  // uncensored Burr(1,1): F(Y) should be uniform, median of Y at 1
  ModelConfig unc = cfg;
  unc.censoring = ModelConfig::Censoring::none;
  unc.gamma_F = [](double) { return 1.0; };
  unc.seed = 77;
  const auto ys = sample_model(unc);
  std::vector<double> u(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) u[i] = burr_cdf(1.0, 1.0, ys.z[i]);
  CHECK(stats::ks_uniform(u, 0.0, 1.0) < 1.63 / std::sqrt(100000.0));

  std::vector<double> z(ys.z.begin(), ys.z.end());
  const double med = stats::median(z);
  CHECK(std::abs(med - 1.0) < 3.0 * 2.0 / std::sqrt(100000.0));

  for (auto d : ys.delta) REQUIRE(d == 1);
}

TEST_CASE("mixture censoring switches to the light tail at the cutoff") {
  // beyond the cutoff every censored observation comes from C2
  auto cfg = burr_paper_config(200000, 13);
  const auto sample = sample_model(cfg);
  std::size_t censored_below = 0, censored_above = 0, above = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample.delta[i] == 0 && sample.z[i] < 100.0) ++censored_below;
    if (sample.z[i] >= 100.0) {
      ++above;
      if (sample.delta[i] == 0) ++censored_above;
    }
  }
  CHECK(censored_below > 0);
  CHECK(above > 0);
  // C2 has tail index 14: above the cutoff censoring becomes dominant
  CHECK(censored_above > 0);
}

TEST_CASE("finite_t_center equals the limit for the exact Pareto model") {
  const auto cfg = exact_pareto_config(0.5, 1.0, 1000, 1);
  CHECK(finite_t_center(cfg, phi_indicator_y_le(2.0), 50.0) == doctest::Approx(0.75).epsilon(1e-7));
  CHECK(finite_t_center(cfg, phi_constant(1.0), 10.0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("finite_t_center for the Burr study approaches the limit value") {
  const auto cfg = burr_paper_config(1000, 1);
  const auto phi = phi_indicator_region(Region(1.8, 2.2));
  const double c1 = finite_t_center(cfg, phi, 1e2);
  const double c2 = finite_t_center(cfg, phi, 1e4);
  CHECK(c2 > c1);
  CHECK(std::abs(c2 - 0.5) < 0.05);
}

TEST_CASE("monte_carlo_clt contracts and small-scale behaviour") {
  const auto cfg = exact_pareto_config(0.5, 1.0, 2000, 7);
  const auto phi = phi_indicator_y_le(2.0);
  CHECK_THROWS_AS(monte_carlo_clt(cfg, phi, 50, 10, 0.95), size_error);
  CHECK_THROWS_AS(monte_carlo_clt(cfg, phi, 3000, 60, 0.95), bounds_error);

  const auto report = monte_carlo_clt(cfg, phi, 50, 60, 0.95);
  CHECK(report.center == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(report.estimates.size() == 60);
  CHECK(report.coverage >= 0.75);
  CHECK(report.coverage <= 1.0);
  CHECK(report.replicate_seeds[0] != report.replicate_seeds[1]);

  // replicates are deterministic in the config seed
  const auto again = monte_carlo_clt(cfg, phi, 50, 60, 0.95);
  CHECK(report.estimates == again.estimates);

  // constant integrand: zero-variance replicates count as covered
  const auto flat = monte_carlo_clt(exact_pareto_config(0.5, 1.0, 2000, 7, false), phi_constant(2.0), 50, 60, 0.95);
  CHECK(flat.coverage == 1.0);
}

TEST_CASE("decomposition residual: uncensored case is exactly zero") {
  const auto cfg = exact_pareto_config(0.5, 1.0, 100, 3, false);
  const auto rep = decomposition_residual_check(cfg, phi_indicator_y_le(2.0), 5.0, 100, 10);
  for (double r : rep.sqrt_k_residuals) CHECK(r == 0.0);
  CHECK(rep.median_abs == 0.0);
}

TEST_CASE("decomposition residual is small and the mass identity holds") {
  const auto cfg = exact_pareto_config(0.5, 1.0, 100, 3);
  const auto rep = decomposition_residual_check(cfg, phi_indicator_y_le(2.0), 5.0, 400, 40);
  CHECK(rep.acceptance_rate > 0.0);
  CHECK(rep.median_abs < 0.2);
  for (double r : rep.sqrt_k_residuals) CHECK(std::isfinite(r));

  // phi = 1 reproduces the weight mass within the residual bound
  const auto mass = decomposition_residual_check(cfg, phi_constant(1.0), 5.0, 400, 40);
  CHECK(mass.median_abs < 0.2);
}

TEST_CASE("decomposition oracle rejects covariate-dependent censoring") {
  const auto cfg = burr_paper_config(100, 3);
  CHECK_THROWS_AS(decomposition_residual_check(cfg, phi_constant(1.0), 5.0, 50, 5), capability_error);
}
