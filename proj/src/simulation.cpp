#include "extkm/simulation.hpp"

#include "extkm/errors.hpp"
#include "extkm/km.hpp"
#include "extkm/limit_model.hpp"
#include "extkm/parallel.hpp"
#include "extkm/quadrature.hpp"
#include "extkm/rng.hpp"
#include "extkm/rv_family.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

namespace extkm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log1p_pow(double y, double tau) {
  const double t = tau * std::log(y);
  if (t > 500.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

} // namespace

double gamma_F_profile(double x) {
  return 0.5 + 2.0 * stats::dnorm((x - 2.0) / 0.1) + 2.0 * stats::dnorm((x - 4.0) / 0.1);
}

double gamma_C1_profile(double x) {
  return 0.75 + 3.0 * stats::dnorm((x - 2.0) / 0.1) + 3.0 * stats::dnorm((x - 4.0) / 0.1);
}

double ModelConfig::log_surv_y(double x, double y) const {
  const double yp = y / y_scale;
  if (yp <= (family == YFamily::pareto ? 1.0 : 0.0)) return 0.0;
  if (family == YFamily::burr) return -kappa(x) * log1p_pow(yp, tau(x));
  return -std::log(yp) / gamma_F(x);
}

double ModelConfig::log_pdf_y(double x, double y) const {
  const double yp = y / y_scale;
  if (family == YFamily::burr) {
    const double k = kappa(x), t = tau(x);
    return std::log(k * t) + (t - 1.0) * std::log(yp) - (k + 1.0) * log1p_pow(yp, t) - std::log(y_scale);
  }
  const double g = gamma_F(x);
  if (yp < 1.0) return -kInf;
  return -std::log(g) - (1.0 / g + 1.0) * std::log(yp) - std::log(y_scale);
}

double ModelConfig::log_surv_c(double x, double y) const {
  if (censoring == Censoring::none) return 0.0;
  const double yp = y / c_scale;
  if (yp <= 1.0) return 0.0;
  const double a1 = 1.0 / gamma_C1(x);
  if (censoring == Censoring::pareto) return -a1 * std::log(yp);
  const double a2 = 1.0 / gamma_C2;
  if (yp >= cutoff) return -a1 * std::log(cutoff) - a2 * std::log(yp);
  // body: C1 between y and the cutoff, or C2 after C1 overshoots
  const double pc = std::pow(cutoff, -a1);
  return std::log(std::pow(yp, -a1) - pc + pc * std::pow(yp, -a2));
}

double ModelConfig::pdf_c(double y) const {
  if (censoring != Censoring::pareto) throw capability_error("pdf_c: needs single-Pareto censoring");
  const double yp = y / c_scale;
  if (yp < 1.0) return 0.0;
  const double a = 1.0 / gamma_C1(x_lo);
  return a * std::pow(yp, -a - 1.0) / c_scale;
}

ModelConfig burr_paper_config(std::int64_t n, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.family = ModelConfig::YFamily::burr;
  cfg.censoring = ModelConfig::Censoring::mixture;
  cfg.gamma_F = gamma_F_profile;
  cfg.kappa = [](double) { return 1.0; };
  cfg.gamma_C1 = gamma_C1_profile;
  cfg.gamma_C2 = 14.0;
  cfg.cutoff = 100.0;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

ModelConfig exact_pareto_config(double gamma_f, double gamma_g, std::int64_t n, std::uint64_t seed, bool censored) {
  if (!(gamma_f > 0.0) || (censored && !(gamma_g > 0.0)))
    throw domain_error("exact_pareto_config: indices must be positive");
  ModelConfig cfg;
  cfg.family = ModelConfig::YFamily::pareto;
  cfg.censoring = censored ? ModelConfig::Censoring::pareto : ModelConfig::Censoring::none;
  cfg.gamma_F = [gamma_f](double) { return gamma_f; };
  cfg.kappa = [](double) { return 1.0; };
  cfg.gamma_C1 = [gamma_g](double) { return gamma_g; };
  cfg.gamma_C2 = gamma_g;
  cfg.cutoff = kInf;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

namespace {

Observation draw_observation(const ModelConfig& cfg, double ux, double uy, double uc1, double uc2) {
  Observation obs;
  const double x = cfg.x_lo + (cfg.x_hi - cfg.x_lo) * ux;
  obs.x = {x};

  double y;
  if (cfg.family == ModelConfig::YFamily::burr) {
    y = cfg.y_scale * burr_quantile(cfg.kappa(x), cfg.tau(x), 1.0 / (1.0 - uy));
  } else {
    y = cfg.y_scale * std::pow(1.0 - uy, -cfg.gamma_F(x));
  }

  double c = kInf;
  if (cfg.censoring != ModelConfig::Censoring::none) {
    const double c1 = cfg.c_scale * std::pow(uc1, -cfg.gamma_C1(x));
    if (cfg.censoring == ModelConfig::Censoring::pareto) {
      c = c1;
    } else {
      const double c2 = cfg.c_scale * std::pow(uc2, -cfg.gamma_C2);
      c = (c1 < cfg.cutoff * cfg.c_scale) ? c1 : c2;
    }
  }

  obs.z = std::min(y, c);
  obs.delta = (y <= c) ? 1 : 0;
  return obs;
}

// local maxima of gamma_F used as quadrature breakpoints; none for a
// flat profile
std::vector<double> gamma_peaks(const ModelConfig& cfg) {
  const std::size_t n = 2001;
  const double h = (cfg.x_hi - cfg.x_lo) / static_cast<double>(n - 1);
  std::vector<double> g(n);
  double gmax = -kInf, gmin = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = cfg.gamma_F(cfg.x_lo + h * static_cast<double>(i));
    gmax = std::max(gmax, g[i]);
    gmin = std::min(gmin, g[i]);
  }
  if (gmax - gmin < 1e-9 * (1.0 + std::abs(gmax))) return {};
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (g[i] >= g[i - 1] && g[i] >= g[i + 1] && g[i] > gmax - 0.5 * (gmax - gmin))
      peaks.push_back(cfg.x_lo + h * static_cast<double>(i));
  return peaks;
}

} // namespace

CensoredSample sample_model(const ModelConfig& cfg) {
  if (cfg.n < 1) throw size_error("sample_model: need n >= 1");
  CensoredSample sample;
  sample.m = 1;
  sample.z.resize(static_cast<std::size_t>(cfg.n));
  sample.delta.resize(static_cast<std::size_t>(cfg.n));
  sample.x.resize(static_cast<std::size_t>(cfg.n));
  par::for_index(cfg.n, [&](std::int64_t i) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
    const double ux = rng.next_u01();
    const double uy = rng.next_u01();
    const double uc1 = rng.next_u01();
    const double uc2 = rng.next_u01();
    const Observation obs = draw_observation(cfg, ux, uy, uc1, uc2);
    sample.z[static_cast<std::size_t>(i)] = obs.z;
    sample.delta[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(obs.delta);
    sample.x[static_cast<std::size_t>(i)] = obs.x[0];
  });
  return sample;
}

double finite_t_center(const ModelConfig& cfg, const PhiFunction& phi, double t) {
  if (!(t > 0.0)) throw domain_error("finite_t_center: t must be positive");
  const auto peaks = gamma_peaks(cfg);

  // covariate weight P(Z > t | X = x) f_X(x), log-shifted
  double shift = -kInf;
  for (std::size_t i = 0; i <= 400; ++i) {
    const double x = cfg.x_lo + (cfg.x_hi - cfg.x_lo) * static_cast<double>(i) / 400.0;
    shift = std::max(shift, cfg.log_surv_y(x, t) + cfg.log_surv_c(x, t));
  }
  const auto weight = [&](double x) { return std::exp(cfg.log_surv_y(x, t) + cfg.log_surv_c(x, t) - shift); };

  // E[phi(x, Y/t) | Y > t, X = x] by log-scale quadrature
  const auto inner = [&](double x) {
    const double log_surv_t = cfg.log_surv_y(x, t);
    const auto f = [&](double u) {
      const double y = std::exp(u);
      return phi(std::span<const double>(&x, 1), y) *
             std::exp(std::log(t) + cfg.log_pdf_y(x, t * y) + u - log_surv_t);
    };
    quad::Options opt;
    opt.abs_tol = 1e-9;
    return quad::integrate_to_inf(f, 0.0, opt);
  };

  quad::Options opt;
  opt.abs_tol = 1e-9;
  const double denom = quad::integrate(weight, cfg.x_lo, cfg.x_hi, opt, peaks);
  if (!(denom > 0.0)) throw numeric_error("finite_t_center: covariate weight underflowed");
  const double numer =
      quad::integrate([&](double x) { return weight(x) * inner(x); }, cfg.x_lo, cfg.x_hi, opt, peaks);
  return numer / denom;
}

namespace {

LimitModel exact_limit_model(const ModelConfig& cfg) {
  LimitModel model;
  model.fx = CovariateLaw::uniform(cfg.x_lo, cfg.x_hi);
  model.gamma_F = cfg.gamma_F;
  model.gamma_U = cfg.gamma_F(0.5 * (cfg.x_lo + cfg.x_hi));
  model.gamma_G = (cfg.censoring == ModelConfig::Censoring::none) ? kInf : cfg.gamma_C1(cfg.x_lo);
  return model;
}

bool exact_tail_counterpart(const ModelConfig& cfg) {
  if (cfg.family != ModelConfig::YFamily::pareto) return false;
  if (cfg.censoring == ModelConfig::Censoring::mixture) return false;
  // constant index probe
  const double g0 = cfg.gamma_F(cfg.x_lo);
  for (int i = 1; i <= 8; ++i)
    if (cfg.gamma_F(cfg.x_lo + (cfg.x_hi - cfg.x_lo) * i / 8.0) != g0) return false;
  return true;
}

} // namespace

MCReport monte_carlo_clt(const ModelConfig& cfg, const PhiFunction& phi, std::size_t k, std::size_t reps,
                         double level) {
  if (reps < 50) throw size_error("monte_carlo_clt: need reps >= 50");
  if (cfg.n < 2 || k < 2 || k >= static_cast<std::size_t>(cfg.n))
    throw bounds_error("monte_carlo_clt: need 2 <= k < n");

  MCReport rep;
  rep.level = level;
  rep.k = k;
  rep.estimates.resize(reps);
  rep.std_errors.resize(reps);
  rep.thresholds.resize(reps);
  rep.replicate_seeds.resize(reps);
  std::vector<std::exception_ptr> errs(reps);

  par::for_index(static_cast<std::int64_t>(reps), [&](std::int64_t r) {
    try {
      ModelConfig local = cfg;
      local.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
      rep.replicate_seeds[r] = local.seed;
      const auto sample = sample_model(local);
      const auto sorted = sort_with_concomitants(sample);
      const auto tail = tail_subsample(sorted, k);
      const auto terms = plugin_terms(tail, phi);
      rep.estimates[r] = terms.integral;
      rep.std_errors[r] = std::sqrt(stats::sample_variance(terms.what) / static_cast<double>(k));
      rep.thresholds[r] = tail.threshold;
    } catch (...) {
      errs[r] = std::current_exception();
    }
  });
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);

  if (exact_tail_counterpart(cfg)) {
    rep.center = limit_functional(phi, exact_limit_model(cfg));
  } else {
    rep.center = finite_t_center(cfg, phi, stats::median(rep.thresholds));
  }

  const double q = stats::qnorm(0.5 + level / 2.0);
  std::size_t covered = 0;
  std::vector<double> z;
  z.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const double se = rep.std_errors[r];
    if (se == 0.0) {
      ++covered; // degenerate zero-width interval counts as covered
      continue;
    }
    if (std::abs(rep.estimates[r] - rep.center) <= q * se) ++covered;
    z.push_back((rep.estimates[r] - rep.center) / se);
  }
  rep.coverage = static_cast<double>(covered) / static_cast<double>(reps);
  rep.normality = (z.size() >= 8) ? stats::anderson_darling_normal(z) : stats::ADTest{0.0, 1.0};
  return rep;
}

// ---- decomposition residual --------------------------------------------

namespace {

// true tail-counterpart gamma functions of a model with x-independent
// censoring, tabulated once per threshold t
class TailCounterpartOracle {
public:
  TailCounterpartOracle(const ModelConfig& cfg, const PhiFunction& phi, double t) : cfg_(cfg), t_(t) {
    censored_ = cfg.censoring != ModelConfig::Censoring::none;
    if (cfg.censoring == ModelConfig::Censoring::mixture)
      throw capability_error("decomposition oracle: censoring must not depend on the covariate");
    if (!censored_) return;

    inv_gc_ = 1.0 / cfg.gamma_C1(cfg.x_lo);
    double a_min = kInf;
    for (int i = 0; i <= 64; ++i)
      a_min = std::min(a_min, 1.0 / cfg.gamma_F(cfg.x_lo + (cfg.x_hi - cfg.x_lo) * i / 64.0));
    const double decay = std::max(a_min - inv_gc_, 0.05);
    u_max_ = 30.0 / std::min(decay, a_min + inv_gc_);
    n_ = 8193;
    du_ = u_max_ / static_cast<double>(n_ - 1);

    // x-averaged ingredients on the grid
    std::vector<double> jphi(n_), ebar(n_), gc(n_), sz(n_);
    const double log_sz_t = log_sz(t_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double v = std::exp(du_ * static_cast<double>(i));
      jphi[i] = x_average([&](double x) {
        return phi(std::span<const double>(&x, 1), v) * std::exp(std::log(t_) + cfg_.log_pdf_y(x, t_ * v));
      });
      ebar[i] = x_average([&](double x) { return std::exp(cfg_.log_surv_y(x, t_ * v)); });
      gc[i] = std::exp(cfg_.log_surv_c(cfg_.x_lo, t_ * v));
      sz[i] = ebar[i] * gc[i];
    }
    const double sz_t = std::exp(log_sz_t);
    gbar_t_ = std::exp(cfg_.log_surv_c(cfg_.x_lo, t_));

    // T(v) = int_v^inf Jphi, R(v) = S_Z(t) int_1^v t g_C(tv)/(Ebar Gbar^2),
    // A(v) = int_1^v Jphi R; trapezoid cumulatives on the log grid
    tail_.assign(n_, 0.0);
    for (std::size_t i = n_ - 1; i-- > 0;) {
      const double f1 = jphi[i] * std::exp(du_ * static_cast<double>(i));
      const double f2 = jphi[i + 1] * std::exp(du_ * static_cast<double>(i + 1));
      tail_[i] = tail_[i + 1] + 0.5 * du_ * (f1 + f2);
    }
    ratio_.assign(n_, 0.0);
    std::vector<double> rint(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double v = std::exp(du_ * static_cast<double>(i));
      rint[i] = sz_t * t_ * cfg_.pdf_c(t_ * v) / (ebar[i] * gc[i] * gc[i]) * v;
    }
    for (std::size_t i = 1; i < n_; ++i) ratio_[i] = ratio_[i - 1] + 0.5 * du_ * (rint[i - 1] + rint[i]);
    acum_.assign(n_, 0.0);
    for (std::size_t i = 1; i < n_; ++i) {
      const double f1 = jphi[i - 1] * ratio_[i - 1] * std::exp(du_ * static_cast<double>(i - 1));
      const double f2 = jphi[i] * ratio_[i] * std::exp(du_ * static_cast<double>(i));
      acum_[i] = acum_[i - 1] + 0.5 * du_ * (f1 + f2);
    }
    sz_.swap(sz);
  }

  double gamma0(double v) const {
    if (!censored_) return 1.0;
    // independence of C makes gamma0 the censoring survival ratio
    return std::exp(cfg_.log_surv_c(cfg_.x_lo, t_) - cfg_.log_surv_c(cfg_.x_lo, t_ * v));
  }

  double gamma1(double v) const {
    if (!censored_) return 0.0;
    const double tl = interp(tail_, v);
    if (tl == 0.0) return 0.0;
    return gbar_t_ * tl / interp(sz_, v);
  }

  double gamma2(double v) const {
    if (!censored_) return 0.0;
    const double sz_t = sz_.front();
    return (gbar_t_ / sz_t) * (interp(acum_, v) + interp(ratio_, v) * interp(tail_, v));
  }

private:
  template <typename Fn>
  double x_average(Fn&& f) const {
    // composite Simpson over the uniform covariate law
    const std::size_t m = 129;
    const double h = (cfg_.x_hi - cfg_.x_lo) / static_cast<double>(m - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = (i == 0 || i == m - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * f(cfg_.x_lo + h * static_cast<double>(i));
    }
    return acc * h / 3.0 / (cfg_.x_hi - cfg_.x_lo);
  }

  double log_sz(double u) const {
    const double e = x_average([&](double x) { return std::exp(cfg_.log_surv_y(x, u)); });
    return std::log(e) + cfg_.log_surv_c(0.0, u);
  }

  double interp(const std::vector<double>& tab, double v) const {
    const double uu = std::log(v);
    if (uu <= 0.0) return tab.front();
    if (uu >= u_max_) return tab.back();
    const double pos = uu / du_;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), n_ - 2);
    const double w = pos - static_cast<double>(i);
    return tab[i] * (1.0 - w) + tab[i + 1] * w;
  }

  const ModelConfig& cfg_;
  double t_;
  bool censored_ = false;
  double inv_gc_ = 0.0;
  double gbar_t_ = 1.0;
  double u_max_ = 1.0, du_ = 1.0;
  std::size_t n_ = 0;
  std::vector<double> tail_, ratio_, acum_, sz_;
};

TailSubsample tail_from_conditional(std::vector<Observation> obs, double t) {
  // ascending stable sort with events first at ties, then reversed
  std::stable_sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) {
    if (a.z != b.z) return a.z < b.z;
    return a.delta > b.delta;
  });
  TailSubsample tail;
  const std::size_t k = obs.size();
  tail.k = k;
  tail.threshold = t;
  tail.m = 1;
  tail.v.resize(k);
  tail.delta_star.resize(k);
  tail.x_star.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& o = obs[k - 1 - i];
    tail.v[i] = o.z / t;
    tail.delta_star[i] = static_cast<std::uint8_t>(o.delta);
    tail.x_star[i] = o.x[0];
  }
  return tail;
}

} // namespace

ResidualReport decomposition_residual_check(const ModelConfig& cfg, const PhiFunction& phi, double t, std::size_t k,
                                            std::size_t reps) {
  if (k < 1 || reps < 1) throw size_error("decomposition_residual_check: need k >= 1 and reps >= 1");
  if (!(t > 0.0)) throw domain_error("decomposition_residual_check: t must be positive");

  const TailCounterpartOracle oracle(cfg, phi, t);

  ResidualReport out;
  out.t = t;
  out.k = k;
  out.reps = reps;
  out.sqrt_k_residuals.resize(reps);
  std::vector<double> attempts(reps, 0.0);
  std::vector<std::exception_ptr> errs(reps);

  const double sqrt_k = std::sqrt(static_cast<double>(k));
  const double inv_k = 1.0 / static_cast<double>(k);

  par::for_index(static_cast<std::int64_t>(reps), [&](std::int64_t r) {
    try {
      RngStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
      std::vector<Observation> accepted;
      accepted.reserve(k);
      std::uint64_t tries = 0;
      const std::uint64_t max_tries = static_cast<std::uint64_t>(k) * 2000000ULL + 10000000ULL;
      while (accepted.size() < k) {
        if (++tries > max_tries)
          throw degenerate_error("decomposition_residual_check: acceptance rate below 1e-6, threshold infeasible");
        const double ux = rng.next_u01();
        const double uy = rng.next_u01();
        const double uc1 = rng.next_u01();
        const double uc2 = rng.next_u01();
        Observation obs = draw_observation(cfg, ux, uy, uc1, uc2);
        if (obs.z > t) accepted.push_back(std::move(obs));
      }
      attempts[r] = static_cast<double>(tries);

      const auto tail = tail_from_conditional(std::move(accepted), t);
      const auto weights = km_weights(tail);
      double residual = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double p = phi(tail.covariates(i), tail.v[i]);
        const double v = tail.v[i];
        const double term_s = weights.w[i] * p;
        const double term_1 = tail.delta_star[i] ? inv_k * (p * oracle.gamma0(v)) : 0.0;
        const double term_2 = tail.delta_star[i] ? 0.0 : inv_k * oracle.gamma1(v);
        const double term_3 = inv_k * oracle.gamma2(v);
        residual += term_s - term_1 - term_2 + term_3;
      }
      out.sqrt_k_residuals[r] = sqrt_k * residual;
    } catch (...) {
      errs[r] = std::current_exception();
    }
  });
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);

  std::vector<double> abs_res(reps);
  for (std::size_t r = 0; r < reps; ++r) abs_res[r] = std::abs(out.sqrt_k_residuals[r]);
  out.median_abs = stats::median(abs_res);
  out.mean_abs = stats::mean(abs_res);
  out.acceptance_rate = static_cast<double>(reps) * static_cast<double>(k) / par::pairwise_sum(attempts);
  return out;
}

} // namespace extkm
