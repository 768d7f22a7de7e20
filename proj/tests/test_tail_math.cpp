#include "extkm/diagnostics.hpp"
#include "extkm/errors.hpp"
#include "extkm/potter.hpp"
#include "extkm/rv_family.hpp"
#include "extkm/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace extkm;

TEST_CASE("burr cdf and quantile closed forms") {
  CHECK(burr_quantile(1.0, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(burr_cdf(1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(burr_quantile(1.0, 2.0, 100.0) == doctest::Approx(std::sqrt(99.0)).epsilon(1e-14));
  CHECK_THROWS_AS(burr_quantile(1.0, 1.0, 1.0), domain_error);
  CHECK_THROWS_AS(burr_quantile(1.0, 1.0, 0.5), domain_error);

  for (double kappa : {0.5, 1.0, 2.0})
    for (double tau : {0.7, 1.0, 2.4})
      for (double t : {1.5, 10.0, 1e4, 1e8}) {
        const double u = burr_quantile(kappa, tau, t);
        CHECK(burr_cdf(kappa, tau, u) == doctest::Approx(1.0 - 1.0 / t).epsilon(1e-10));
      }
}

TEST_CASE("survival/quantile round trip across families") {
  const auto burr = burr_family(1.0, 2.0);
  const auto burr_x = burr_family([](double) { return 1.0; }, [](double x) { return 1.0 / gamma_F_profile(x); });
  const auto pareto = pareto_family(0.7);
  for (const auto& fam : {burr, burr_x, pareto}) {
    for (double x : {1.0, 2.0, 3.7}) {
      for (double t : {2.0, 100.0, 1e6}) {
        const double u = fam.tail_quantile(x, t);
        CHECK(fam.survival(x, u) * t == doctest::Approx(1.0).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("karamata components of the Burr family") {
  const auto fam = burr_family(1.0, 2.0);
  CHECK(fam.rho(1.0) == -1.0);
  CHECK(fam.karamata_c_limit(1.0) == doctest::Approx(0.5).epsilon(1e-15)); // 2^{-kappa}

  // delta -> kappa tau = 1/gamma
  const auto fam11 = burr_family(1.0, 1.0);
  CHECK(fam11.karamata_delta(1.0, 1e8) == doctest::Approx(1.0).epsilon(1e-7));

  // eta at u = 1e6, kappa=1, tau=2: u/(2(u-1)) ~ 0.5 = gamma
  CHECK(fam.eta(1.0, 1e6) == doctest::Approx(1e6 / (2.0 * (1e6 - 1.0))).epsilon(1e-13));
  CHECK(fam.gamma(1.0) == doctest::Approx(0.5));

  const auto comp = karamata_components(fam, 1.0, 1e6);
  CHECK(comp.rho == -1.0);
  CHECK(comp.eta == doctest::Approx(0.5).epsilon(1e-5));
  CHECK_THROWS_AS(karamata_components(fam, 1.0, 1.0), domain_error);

  // slowly varying part times the pure power reproduces the survival
  for (double y : {1.5, 7.0, 1e3}) {
    const double l = fam.slowly_varying(1.0, y);
    CHECK(l * std::pow(y, -2.0) == doctest::Approx(fam.survival(1.0, y)).epsilon(1e-12));
  }
}

TEST_CASE("second-order rate function of the Burr family") {
  const auto fam = burr_family(1.0, 2.0);
  // a(t) = rho (1 - (t/(t-1))^{1/2}) for kappa = 1
  const double t = 50.0;
  CHECK(fam.second_order_a(1.0, t) ==
        doctest::Approx(-(1.0 - std::sqrt(t / (t - 1.0)))).epsilon(1e-12));
  CHECK(std::abs(fam.second_order_a(1.0, 1e8)) < 1e-7); // a(t) -> 0
}

TEST_CASE("potter report: Burr(1,2) ratio value and bands") {
  const auto fam = burr_family(1.0, 2.0);
  // survival ratio at t=100, y=10: (1+t^2)/(1+(ty)^2)
  const double ratio = fam.survival(1.0, 1000.0) / fam.survival(1.0, 100.0);
  CHECK(ratio == doctest::Approx(10001.0 / 1000001.0).epsilon(1e-12));
  CHECK(ratio <= 1.05 * std::pow(10.0, -2.0 + 0.05));
  CHECK(ratio >= 0.95 * std::pow(10.0, -2.0 - 0.05));

  const auto pass_report = potter_bound_report(fam, 0.05, 0.05, 50.0, log_spaced(100.0, 1e6, 13),
                                               log_spaced(1.0 + 1e-9, 1e3, 40), {1.0});
  CHECK(pass_report.pass);
  CHECK(pass_report.max_violation <= 0.0);
  CHECK(pass_report.points_checked > 0);

  const auto fail_report =
      potter_bound_report(fam, 0.05, 0.05, 1.0, {1.1}, log_spaced(1.0 + 1e-9, 1e3, 40), {1.0});
  CHECK(!fail_report.pass);
  CHECK(fail_report.max_violation > 0.0);
  CHECK((fail_report.worst.chain == "survival" || fail_report.worst.chain == "quantile"));
}

TEST_CASE("potter report: exact Pareto passes with zero slack") {
  const auto fam = pareto_family([](double x) { return 0.4 + 0.1 * x; });
  const auto report = potter_bound_report(fam, 0.0, 0.0, 1.0, log_spaced(2.0, 1e8, 9),
                                          log_spaced(1.0 + 1e-9, 1e3, 33), lin_spaced(0.0, 4.0, 5));
  CHECK(report.pass);
  CHECK(report.max_violation == 0.0);
}

TEST_CASE("potter report guards") {
  const auto fam = pareto_family(0.5);
  CHECK_THROWS_AS(potter_bound_report(fam, 0.05, 0.05, 100.0, {10.0, 50.0}, {2.0}, {1.0}), bounds_error);
  CHECK_THROWS_AS(potter_bound_report(fam, 0.05, 0.05, 1.0, {}, {2.0}, {1.0}), size_error);
  const auto json = potter_bound_report(fam, 0.0, 0.0, 1.0, {10.0}, {2.0}, {1.0}).to_json_string();
  CHECK(json.find("max_violation") != std::string::npos);
}

TEST_CASE("condition diagnostics on the Burr family") {
  const auto fam11 = burr_family(1.0, 1.0);
  const auto rep = condition_diagnostics(fam11, {1.0}, log_spaced(10.0, 1e6, 6));

  const auto& delta = rep.find("karamata_delta_gap");
  CHECK(delta.sup_gap.back() < 1e-5); // u^tau/(1+u^tau) gap at u=1e6
  CHECK(delta.decreasing);

  // log(u) (1 - u/(u-1)) at u = 1e6 is about 1.38e-5
  const auto& lrem = rep.find("eta_log_remainder");
  CHECK(lrem.sup_gap.back() == doctest::Approx(std::log(1e6) / (1e6 - 1.0)).epsilon(1e-6));
  CHECK(lrem.sup_gap.back() < 1e-4);
  CHECK(lrem.decreasing);

  const auto& eta = rep.find("eta_gap");
  CHECK(eta.decreasing);
  const auto& c = rep.find("karamata_c_gap");
  for (double g : c.sup_gap) CHECK(g == 0.0); // c constant in y for Burr

  const auto paper =
      condition_diagnostics(burr_family([](double) { return 1.0; },
                                        [](double x) { return 1.0 / gamma_F_profile(x); }),
                            lin_spaced(1.0, 5.0, 21), log_spaced(10.0, 1e6, 6));
  CHECK(paper.find("karamata_delta_gap").decreasing);
  CHECK(paper.find("eta_gap").decreasing);
  CHECK(paper.find("slowly_varying_ratio_gap").decreasing);
  CHECK(paper.to_json_string().find("eta_gap") != std::string::npos);
}

TEST_CASE("condition diagnostics vanish identically for exact Pareto") {
  const auto fam = pareto_family([](double x) { return 0.3 + 0.2 * x; });
  const auto rep = condition_diagnostics(fam, lin_spaced(0.0, 3.0, 7), log_spaced(10.0, 1e8, 5));
  for (const auto& series : rep.series) {
    for (double g : series.sup_gap) CHECK(g == 0.0);
    CHECK(series.decreasing);
  }
}
