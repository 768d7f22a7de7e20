// Benchmark of the OpenMP kernels against the serial reference loop.
// Verifies bit-identical results before reporting the speedup.

#include "extkm/km.hpp"
#include "extkm/limit_model.hpp"
#include "extkm/parallel.hpp"
#include "extkm/rng.hpp"
#include "extkm/rv_family.hpp"
#include "extkm/sample.hpp"
#include "extkm/simulation.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstring>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); }

} // namespace

int main() {
  std::printf("threads available: %d\n", extkm::par::max_threads());

  // 1. sample generation: serial re-derivation of the draw vs the
  //    parallel library kernel, checked bit-identical
  {
    auto cfg = extkm::burr_paper_config(2000000, 99);
    std::vector<double> z_serial(static_cast<std::size_t>(cfg.n));
    std::vector<std::uint8_t> d_serial(static_cast<std::size_t>(cfg.n));
    std::vector<double> x_serial(static_cast<std::size_t>(cfg.n));
    const auto t0 = Clock::now();
    extkm::par::for_index_serial(cfg.n, [&](std::int64_t i) {
      extkm::RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
      const double ux = rng.next_u01();
      const double uy = rng.next_u01();
      const double uc1 = rng.next_u01();
      const double uc2 = rng.next_u01();
      const double x = cfg.x_lo + (cfg.x_hi - cfg.x_lo) * ux;
      const double y = extkm::burr_quantile(cfg.kappa(x), cfg.tau(x), 1.0 / (1.0 - uy));
      const double c1 = std::pow(uc1, -cfg.gamma_C1(x));
      const double c2 = std::pow(uc2, -cfg.gamma_C2);
      const double c = (c1 < cfg.cutoff) ? c1 : c2;
      z_serial[static_cast<std::size_t>(i)] = std::min(y, c);
      d_serial[static_cast<std::size_t>(i)] = y <= c ? 1 : 0;
      x_serial[static_cast<std::size_t>(i)] = x;
    });
    const auto t1 = Clock::now();
    const auto sample = extkm::sample_model(cfg);
    const auto t2 = Clock::now();

    const bool identical = std::memcmp(sample.z.data(), z_serial.data(), z_serial.size() * sizeof(double)) == 0 &&
                           std::memcmp(sample.delta.data(), d_serial.data(), d_serial.size()) == 0 &&
                           std::memcmp(sample.x.data(), x_serial.data(), x_serial.size() * sizeof(double)) == 0;
    std::printf("[sample_model n=2e6] serial: %.3fs  parallel: %.3fs  speedup: %.2fx  identical: %s\n",
                seconds(t0, t1), seconds(t1, t2), seconds(t0, t1) / seconds(t1, t2), identical ? "yes" : "NO");
  }

  // 2. replicated plug-in estimation: serial vs parallel replicate loop
  {
    const std::size_t reps = 64, k = 500;
    auto cfg = extkm::exact_pareto_config(0.5, 1.0, 20000, 7);
    const auto phi = extkm::phi_indicator_y_le(2.0);
    std::vector<double> est_serial(reps), est_parallel(reps);

    const auto run_one = [&](std::size_t r) {
      auto local = cfg;
      local.seed = extkm::derive_seed(cfg.seed, r);
      const auto tail = extkm::tail_subsample(extkm::sort_with_concomitants(extkm::sample_model(local)), k);
      return extkm::plugin_terms(tail, phi).integral;
    };

    const auto t0 = Clock::now();
    extkm::par::for_index_serial(static_cast<std::int64_t>(reps),
                                 [&](std::int64_t r) { est_serial[r] = run_one(static_cast<std::size_t>(r)); });
    const auto t1 = Clock::now();
    extkm::par::for_index(static_cast<std::int64_t>(reps),
                          [&](std::int64_t r) { est_parallel[r] = run_one(static_cast<std::size_t>(r)); });
    const auto t2 = Clock::now();

    const bool identical = std::memcmp(est_serial.data(), est_parallel.data(), reps * sizeof(double)) == 0;
    std::printf("[replicates 64 x n=2e4] serial: %.3fs  parallel: %.3fs  speedup: %.2fx  identical: %s\n",
                seconds(t0, t1), seconds(t1, t2), seconds(t0, t1) / seconds(t1, t2), identical ? "yes" : "NO");
  }

  // 3. Monte Carlo variance oracle
  {
    extkm::LimitModel lm;
    lm.fx = extkm::CovariateLaw::point_masses({{3.0, 1.0}});
    lm.gamma_F = [](double) { return 0.5; };
    lm.gamma_U = 0.5;
    lm.gamma_G = 1.0;
    const auto phi = extkm::phi_indicator_y_le(2.0);
    const auto t0 = Clock::now();
    const auto mc = extkm::asymptotic_variance_oracle(phi, lm, extkm::OracleMethod::monte_carlo, 4000000, 3);
    const auto t1 = Clock::now();
    const auto mc2 = extkm::asymptotic_variance_oracle(phi, lm, extkm::OracleMethod::monte_carlo, 4000000, 3);
    const auto t2 = Clock::now();
    std::printf("[variance oracle 4e6 draws] run1: %.3fs run2: %.3fs  identical: %s (sigma2=%.6f)\n",
                seconds(t0, t1), seconds(t1, t2), mc.sigma2 == mc2.sigma2 ? "yes" : "NO", mc.sigma2);
  }
  return 0;
}
