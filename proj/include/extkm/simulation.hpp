#pragma once

#include "extkm/phi.hpp"
#include "extkm/sample.hpp"
#include "extkm/stats.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace extkm {

/// Tail index of the conditional response in the simulation study:
/// 0.5 + 2 dnorm((x-2)/0.1) + 2 dnorm((x-4)/0.1).
double gamma_F_profile(double x);

/// Body censoring index: 0.75 + 3 dnorm((x-2)/0.1) + 3 dnorm((x-4)/0.1).
double gamma_C1_profile(double x);

/// Generative model: Y|X Burr (or exact Pareto), X uniform on
/// [x_lo, x_hi], censoring by a body/tail Pareto mixture switched at
/// `cutoff`, a single Pareto, or disabled. Pareto draws live on
/// [scale, inf) with survival (y/scale)^(-1/gamma); scales default to 1
/// and exist for sensitivity runs. Sampling is deterministic given
/// (seed, n) and independent of thread count.
struct ModelConfig {
  enum class YFamily { burr, pareto };
  enum class Censoring { none, pareto, mixture };

  YFamily family = YFamily::burr;
  Censoring censoring = Censoring::mixture;

  std::function<double(double)> gamma_F;  // tail index of Y | X = x
  std::function<double(double)> kappa;    // Burr shape, default 1
  std::function<double(double)> gamma_C1; // body (or sole) censoring index
  double gamma_C2 = 14.0;
  double cutoff = 100.0; // C = C1 if C1 < cutoff * c_scale, else C2

  double x_lo = 1.0, x_hi = 5.0;
  double y_scale = 1.0, c_scale = 1.0;

  std::int64_t n = 0;
  std::uint64_t seed = 0;

  double tau(double x) const { return 1.0 / (kappa(x) * gamma_F(x)); }

  // model functions used by centering and the decomposition oracle
  double log_surv_y(double x, double y) const;
  double log_pdf_y(double x, double y) const;
  double log_surv_c(double x, double y) const;
  double pdf_c(double y) const; // requires x-independent censoring
};

/// The full simulation-study configuration: Burr response with
/// kappa = 1, tau = 1/gamma_F, mixture censoring with cutoff 100.
ModelConfig burr_paper_config(std::int64_t n, std::uint64_t seed);

/// Constant-index Pareto response and (optionally) Pareto censoring;
/// the tail counterpart of this model is exact at every threshold.
ModelConfig exact_pareto_config(double gamma_f, double gamma_g, std::int64_t n, std::uint64_t seed,
                                bool censored = true);

/// Draws n observations (min(Y,C), 1{Y<=C}, X). Observation i consumes
/// a fixed four-draw stream derived from (seed, i), so output is
/// bit-identical under any parallel schedule.
CensoredSample sample_model(const ModelConfig& config);

/// Deterministic centering value int phi dF^t for the model at
/// threshold t, by nested quadrature.
double finite_t_center(const ModelConfig& config, const PhiFunction& phi, double t);

struct MCReport {
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::vector<double> thresholds;
  std::vector<std::uint64_t> replicate_seeds;
  double center = 0.0;
  double coverage = 0.0;
  double level = 0.95;
  std::size_t k = 0;
  stats::ADTest normality; // of standardized estimates (est - center)/se
};

/// Replicated CLT study: per replicate, simulates the model, computes
/// S_{k,n}(phi) with its plug-in interval, and measures coverage of the
/// centering value: the exact limit functional for exact-Pareto
/// configurations, otherwise int phi dF^t at the median realized
/// threshold. Zero-variance replicates count as covered.
MCReport monte_carlo_clt(const ModelConfig& config, const PhiFunction& phi, std::size_t k, std::size_t reps,
                         double level);

struct ResidualReport {
  std::vector<double> sqrt_k_residuals; // sqrt(k) * r_{k,n} per replicate
  double median_abs = 0.0;
  double mean_abs = 0.0;
  double acceptance_rate = 0.0;
  double t = 0.0;
  std::size_t k = 0;
  std::size_t reps = 0;
};

/// Validates the exchangeable-sum decomposition: draws k conditional
/// triples (X, Y/t, C/t | Z > t) by rejection, computes S_{k,n}(phi)
/// through the weights and through the three exchangeable sums with the
/// model's true tail-counterpart gamma functions, and reports the
/// distribution of sqrt(k) r_{k,n}. Requires censoring that does not
/// depend on the covariate (none or single Pareto); with censoring
/// disabled the residual is exactly zero.
ResidualReport decomposition_residual_check(const ModelConfig& config, const PhiFunction& phi, double t,
                                            std::size_t k, std::size_t reps);

} // namespace extkm
