#include "extkm/limit_model.hpp"

#include "extkm/errors.hpp"
#include "extkm/parallel.hpp"
#include "extkm/quadrature.hpp"
#include "extkm/rng.hpp"
#include "extkm/stats.hpp"

#include <algorithm>
#include <cmath>

namespace extkm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Component {
  double x = 0.0;
  double mass = 0.0;
  double gamma = 1.0;
};

// Discretizes the covariate law into weighted nodes: atoms directly,
// densities via composite Simpson on 513 nodes (renormalized).
std::vector<Component> mixture_components(const LimitModel& model) {
  std::vector<Component> out;
  if (model.fx.discrete()) {
    for (const auto& a : model.fx.atoms) out.push_back({a.x, a.mass, model.gamma_F(a.x)});
  } else {
    if (!model.fx.density || !(model.fx.hi > model.fx.lo))
      throw value_error("LimitModel: continuous fx needs a density on [lo, hi]");
    const std::size_t n = 513;
    const double h = (model.fx.hi - model.fx.lo) / static_cast<double>(n - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = model.fx.lo + h * static_cast<double>(i);
      double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      w *= h / 3.0 * model.fx.density(x);
      out.push_back({x, w, model.gamma_F(x)});
      total += w;
    }
    if (!(total > 0.0)) throw degenerate_error("LimitModel: covariate density integrates to zero");
    for (auto& c : out) c.mass /= total;
  }
  double mass = 0.0;
  for (const auto& c : out) {
    if (!(c.gamma > 0.0)) throw domain_error("LimitModel: gamma_F must be positive on the support");
    mass += c.mass;
  }
  if (!(std::abs(mass - 1.0) < 1e-8)) throw value_error("LimitModel: covariate law mass != 1");
  return out;
}

// ---- limit gamma functions tabulated on a log grid --------------------

struct OracleTables {
  double b = 0.0; // 1/gamma_G
  std::vector<Component> comps;
  std::vector<double> u;    // log v grid
  std::vector<double> fbar; // survival of Y_o
  std::vector<double> tail; // T(v) = sum_j m_j int_v^inf phi f_j
  std::vector<double> ratio_cum; // R(v) = int_1^v b s^{b-1}/fbar ds
  std::vector<double> a_cum;     // int_1^v Jphi(w) R(w) dw
  double du = 0.0;

  double fbar_at(double v) const {
    double s = 0.0;
    for (const auto& c : comps) s += c.mass * std::pow(v, -1.0 / c.gamma);
    return s;
  }

  double interp(const std::vector<double>& tab, double v) const {
    const double uu = std::log(v);
    if (uu <= 0.0) return tab.front();
    if (uu >= u.back()) return tab.back();
    const double pos = uu / du;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), u.size() - 2);
    const double w = pos - static_cast<double>(i);
    return tab[i] * (1.0 - w) + tab[i + 1] * w;
  }

  double gamma0(double v) const { return b == 0.0 ? 1.0 : std::pow(v, b); }

  double gamma1(double v) const {
    if (b == 0.0) return 0.0;
    const double t = interp(tail, v);
    if (t == 0.0) return 0.0;
    return std::pow(v, b) * t / fbar_at(v);
  }

  double gamma2(double v) const {
    if (b == 0.0) return 0.0;
    return interp(a_cum, v) + interp(ratio_cum, v) * interp(tail, v);
  }
};

OracleTables build_tables(const PhiFunction& phi, const LimitModel& model) {
  OracleTables tab;
  tab.b = model.censored() ? 1.0 / model.gamma_G : 0.0;
  tab.comps = mixture_components(model);

  double a_min = kInf;
  for (const auto& c : tab.comps) a_min = std::min(a_min, 1.0 / c.gamma);
  const double decay = std::max(model.censored() ? a_min - tab.b : a_min, 0.05);
  const double u_max = 30.0 / std::min(decay, a_min + tab.b);

  const std::size_t n = 16385;
  tab.u.resize(n);
  tab.du = u_max / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) tab.u[i] = tab.du * static_cast<double>(i);

  tab.fbar.resize(n);
  std::vector<double> jphi(n, 0.0); // sum_j m_j phi(x_j, v) a_j v^{-a_j}, du-density
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::exp(tab.u[i]);
    double fb = 0.0, jp = 0.0;
    for (const auto& c : tab.comps) {
      const double a = 1.0 / c.gamma;
      const double dens = a * std::exp(-a * tab.u[i]);
      fb += c.mass * std::exp(-a * tab.u[i]);
      jp += c.mass * phi(std::span<const double>(&c.x, 1), v) * dens;
    }
    tab.fbar[i] = fb;
    jphi[i] = jp;
  }

  tab.tail.assign(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;)
    tab.tail[i] = tab.tail[i + 1] + 0.5 * tab.du * (jphi[i] + jphi[i + 1]);

  tab.ratio_cum.assign(n, 0.0);
  if (tab.b > 0.0) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = tab.b * std::exp(tab.b * tab.u[i]) / tab.fbar[i];
    for (std::size_t i = 1; i < n; ++i)
      tab.ratio_cum[i] = tab.ratio_cum[i - 1] + 0.5 * tab.du * (r[i - 1] + r[i]);
  }

  tab.a_cum.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    tab.a_cum[i] = tab.a_cum[i - 1] + 0.5 * tab.du * (jphi[i - 1] * tab.ratio_cum[i - 1] + jphi[i] * tab.ratio_cum[i]);

  return tab;
}

// Lhat(x): numeric limit of the slowly varying part survival * t^{1/gamma}
double slowly_varying_limit(const RVFamily& family, double x) {
  const double g = family.gamma(x);
  const double logt = std::log(10.0) * 10.0;
  const double val = std::exp(family.log_survival(x, std::exp(logt)) + logt / g);
  if (!std::isfinite(val) || val <= 0.0) throw numeric_error("slowly varying limit did not stabilize");
  return val;
}

std::vector<double> detect_gamma_peaks(const RVFamily& family, double lo, double hi) {
  const std::size_t n = 4001;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> g(n);
  double gmax = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = family.gamma(lo + h * static_cast<double>(i));
    gmax = std::max(gmax, g[i]);
  }
  const double tol = 1e-6 * (1.0 + std::abs(gmax));
  std::vector<double> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    if (g[i] < gmax - tol) continue;
    const bool left_ok = (i == 0) || g[i] >= g[i - 1];
    const bool right_ok = (i == n - 1) || g[i] >= g[i + 1];
    if (!(left_ok && right_ok)) continue;
    // golden-section refinement inside the bracketing cell
    double a = std::max(lo, lo + h * (static_cast<double>(i) - 1.0));
    double b = std::min(hi, lo + h * (static_cast<double>(i) + 1.0));
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = family.gamma(x1), f2 = family.gamma(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = family.gamma(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = family.gamma(x1);
      }
    }
    const double xp = 0.5 * (a + b);
    bool dup = false;
    for (double q : peaks)
      if (std::abs(q - xp) < 2.0 * h) dup = true;
    if (!dup) peaks.push_back(xp);
  }
  return peaks;
}

// P(X in window | Y > t) for every window, log-domain weights
std::vector<double> window_probs(const RVFamily& family, const CovariateLaw& fx, double t,
                                 const std::vector<double>& edges, const std::vector<double>& peaks) {
  double shift = -kInf;
  for (double p : peaks) shift = std::max(shift, family.log_survival(p, t));
  const auto weight = [&](double x) { return fx.density(x) * std::exp(family.log_survival(x, t) - shift); };
  quad::Options opt;
  opt.abs_tol = 1e-12;
  const double total = quad::integrate(weight, fx.lo, fx.hi, opt, peaks);
  if (!(total > 0.0)) throw numeric_error("covariate_limit_distribution: normalizer underflowed");
  std::vector<double> probs;
  for (std::size_t j = 0; j + 1 < edges.size(); ++j)
    probs.push_back(quad::integrate(weight, edges[j], edges[j + 1], opt, peaks) / total);
  return probs;
}

double aitken_limit(const std::vector<double>& seq) {
  const std::size_t n = seq.size();
  if (n < 3) return seq.back();
  const double d1 = seq[n - 2] - seq[n - 3];
  const double d2 = seq[n - 1] - seq[n - 2];
  const double denom = d2 - d1;
  if (std::abs(denom) < 1e-14 * (1.0 + std::abs(seq[n - 1]))) return seq[n - 1];
  const double ext = seq[n - 1] - d2 * d2 / denom;
  // reject wild extrapolations
  if (!std::isfinite(ext) || std::abs(ext - seq[n - 1]) > 10.0 * std::abs(d2)) return seq[n - 1];
  return ext;
}

} // namespace

// ---- CovariateLaw ------------------------------------------------------

double CovariateLaw::prob_interval(double a, double b) const {
  if (!(b >= a)) throw domain_error("prob_interval: b < a");
  if (discrete()) {
    double p = 0.0;
    for (const auto& at : atoms)
      if (at.x > a && at.x <= b) p += at.mass;
    return p;
  }
  if (!density) throw value_error("CovariateLaw: neither atoms nor density set");
  const double x0 = std::max(a, lo), x1 = std::min(b, hi);
  if (!(x1 > x0)) return 0.0;
  quad::Options opt;
  opt.abs_tol = 1e-11;
  return quad::integrate(density, x0, x1, opt, quad_breakpoints);
}

double CovariateLaw::total_mass() const {
  if (discrete()) {
    double p = 0.0;
    for (const auto& at : atoms) p += at.mass;
    return p;
  }
  quad::Options opt;
  opt.abs_tol = 1e-11;
  return quad::integrate(density, lo, hi, opt, quad_breakpoints);
}

CovariateLaw CovariateLaw::uniform(double lo, double hi) {
  if (!(hi > lo)) throw domain_error("CovariateLaw::uniform: need hi > lo");
  CovariateLaw law;
  law.lo = lo;
  law.hi = hi;
  const double dens = 1.0 / (hi - lo);
  law.density = [dens](double) { return dens; };
  return law;
}

CovariateLaw CovariateLaw::point_masses(std::vector<Atom> atoms) {
  CovariateLaw law;
  law.atoms = std::move(atoms);
  if (law.atoms.empty()) throw size_error("CovariateLaw::point_masses: no atoms");
  return law;
}

// ---- covariate limit distribution --------------------------------------

CovariateLaw covariate_limit_distribution(const RVFamily& family, const CovariateLaw& fx, double t) {
  if (std::isfinite(t)) {
    if (!(t > 0.0)) throw domain_error("covariate_limit_distribution: t must be positive");
    if (fx.discrete()) {
      double shift = -kInf;
      for (const auto& a : fx.atoms) shift = std::max(shift, family.log_survival(a.x, t));
      CovariateLaw out;
      double total = 0.0;
      for (const auto& a : fx.atoms) {
        const double w = a.mass * std::exp(family.log_survival(a.x, t) - shift);
        out.atoms.push_back({a.x, w});
        total += w;
      }
      if (!(total > 0.0)) throw numeric_error("covariate_limit_distribution: normalizer underflowed");
      for (auto& a : out.atoms) a.mass /= total;
      return out;
    }
    const auto peaks = detect_gamma_peaks(family, fx.lo, fx.hi);
    double shift = -kInf;
    for (double p : peaks) shift = std::max(shift, family.log_survival(p, t));
    const auto prior = fx.density;
    const auto weight = [prior, family, t, shift](double x) {
      return prior(x) * std::exp(family.log_survival(x, t) - shift);
    };
    quad::Options opt;
    opt.abs_tol = 1e-12;
    const double norm = quad::integrate(weight, fx.lo, fx.hi, opt, peaks);
    if (!(norm > 0.0)) throw numeric_error("covariate_limit_distribution: normalizer underflowed");
    CovariateLaw out;
    out.lo = fx.lo;
    out.hi = fx.hi;
    out.quad_breakpoints = peaks;
    out.density = [weight, norm](double x) { return weight(x) / norm; };
    return out;
  }

  // t = infinity
  if (fx.discrete()) {
    double gmax = -kInf;
    for (const auto& a : fx.atoms) gmax = std::max(gmax, family.gamma(a.x));
    const double tol = 1e-9 * (1.0 + std::abs(gmax));
    CovariateLaw out;
    double total = 0.0;
    for (const auto& a : fx.atoms) {
      if (family.gamma(a.x) < gmax - tol) continue;
      const double w = a.mass * slowly_varying_limit(family, a.x);
      out.atoms.push_back({a.x, w});
      total += w;
    }
    for (auto& a : out.atoms) a.mass /= total;
    return out;
  }

  // continuous prior: a flat gamma keeps a density, an argmax set of
  // positive length restricts the density to it, and isolated argmax
  // points collapse to point masses found by extrapolating window
  // probabilities along a doubling threshold sequence
  const std::size_t probe_n = 2000;
  std::vector<double> probe(probe_n + 1);
  double gmin = kInf, gmax = -kInf;
  for (std::size_t i = 0; i <= probe_n; ++i) {
    const double x = fx.lo + (fx.hi - fx.lo) * static_cast<double>(i) / static_cast<double>(probe_n);
    probe[i] = family.gamma(x);
    gmin = std::min(gmin, probe[i]);
    gmax = std::max(gmax, probe[i]);
  }
  const bool flat = gmax - gmin < 1e-6 * (1.0 + std::abs(gmax));
  const double argmax_cut = gmax - 1e-9 * (1.0 + std::abs(gmax));
  std::size_t on_argmax = 0;
  for (double g : probe)
    if (g >= argmax_cut) ++on_argmax;

  if (flat || on_argmax >= probe_n / 100) {
    // reweight by the slowly varying limits, restricted to the argmax set
    const auto prior = fx.density;
    const double cut = flat ? -kInf : argmax_cut;
    const auto weight = [prior, family, cut](double x) {
      if (family.gamma(x) < cut) return 0.0;
      return prior(x) * slowly_varying_limit(family, x);
    };
    std::vector<double> edges;
    for (std::size_t i = 0; i + 1 <= probe_n; ++i)
      if ((probe[i] >= argmax_cut) != (probe[i + 1] >= argmax_cut))
        edges.push_back(fx.lo + (fx.hi - fx.lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(probe_n));
    quad::Options opt;
    opt.abs_tol = 1e-12;
    const double norm = quad::integrate(weight, fx.lo, fx.hi, opt, edges);
    if (!(norm > 0.0)) throw degenerate_error("covariate_limit_distribution: zero limit mass");
    CovariateLaw out;
    out.lo = fx.lo;
    out.hi = fx.hi;
    out.quad_breakpoints = edges;
    out.density = [weight, norm](double x) { return weight(x) / norm; };
    return out;
  }

  const auto peaks = detect_gamma_peaks(family, fx.lo, fx.hi);
  if (peaks.empty()) throw numeric_error("covariate_limit_distribution: no argmax points found");
  std::vector<double> edges{fx.lo};
  for (std::size_t j = 0; j + 1 < peaks.size(); ++j) edges.push_back(0.5 * (peaks[j] + peaks[j + 1]));
  edges.push_back(fx.hi);

  std::vector<std::vector<double>> seqs(peaks.size());
  double t_probe = 100.0;
  for (int m = 0; m < 40; ++m) {
    const auto probs = window_probs(family, fx, t_probe, edges, peaks);
    for (std::size_t j = 0; j < peaks.size(); ++j) seqs[j].push_back(probs[j]);
    if (m >= 2) {
      double step = 0.0;
      for (const auto& s : seqs) step = std::max(step, std::abs(s[s.size() - 1] - s[s.size() - 2]));
      if (step < 2.5e-5) break;
    }
    t_probe *= 2.0;
  }

  CovariateLaw out;
  double total = 0.0;
  for (std::size_t j = 0; j < peaks.size(); ++j) {
    const double mass = aitken_limit(seqs[j]);
    out.atoms.push_back({peaks[j], mass});
    total += mass;
  }
  if (!(total > 0.0)) throw degenerate_error("covariate_limit_distribution: zero limit mass");
  for (auto& a : out.atoms) a.mass /= total;
  return out;
}

// ---- limit functional and variance oracle ------------------------------

LimitModel section4_limit_model() {
  LimitModel model;
  const double gamma_u = 0.5 + 2.0 * stats::dnorm(0.0) + 2.0 * stats::dnorm(20.0);
  model.fx = CovariateLaw::point_masses({{2.0, 0.5}, {4.0, 0.5}});
  model.gamma_F = [gamma_u](double) { return gamma_u; };
  model.gamma_U = gamma_u;
  model.gamma_G = 14.0;
  return model;
}

double limit_functional(const PhiFunction& phi, const LimitModel& model) {
  if (phi.envelope) {
    // envelope-bounded integrability check at the flattest index
    try {
      quad::pareto_expectation([&](double w) { return phi.envelope(w); }, 1.0 / model.gamma_U);
    } catch (const numeric_error&) {
      throw domain_error("limit_functional: envelope is not integrable against the limit law");
    }
  }
  const auto comps = mixture_components(model);
  double s = 0.0;
  for (const auto& c : comps) {
    const double x = c.x;
    s += c.mass *
         quad::pareto_expectation([&](double w) { return phi(std::span<const double>(&x, 1), w); }, 1.0 / c.gamma);
  }
  return s;
}

bool condition1_moment_check(const PhiFunction& phi, double gamma_G, double gamma_U) {
  if (!phi.envelope) throw capability_error("condition1_moment_check: phi has no envelope");
  const double eps = 1e-3;
  const double inv_g = std::isfinite(gamma_G) ? 1.0 / gamma_G : 0.0;
  const double alpha = inv_g - 1.0 / gamma_U - 1.0 + eps;
  const auto integrand = [&](double w) { return std::pow(std::abs(phi.envelope(w)), 2.0 + eps) * std::pow(w, alpha); };
  try {
    quad::Options opt;
    opt.abs_tol = 1e-8;
    quad::integrate_to_inf(integrand, 1.0, opt);
    return true;
  } catch (const numeric_error&) {
    return false;
  }
}

VarianceEstimate asymptotic_variance_oracle(const PhiFunction& phi, const LimitModel& model, OracleMethod method,
                                            std::size_t reps, std::uint64_t seed) {
  if (phi.envelope && !condition1_moment_check(phi, model.gamma_G, model.gamma_U))
    throw domain_error("asymptotic_variance_oracle: phi inadmissible (Condition-1 moment check failed)");

  const auto tab = build_tables(phi, model);
  VarianceEstimate out;

  if (method == OracleMethod::quadrature) {
    // adaptive in log v over the table range so that integrand jumps
    // (indicator phi) are resolved below tolerance
    const auto moment = [&](bool squared) {
      return quad::integrate(
          [&](double u) {
            const double v = std::exp(u);
            const double g2 = tab.gamma2(v);
            double acc = 0.0;
            for (const auto& c : tab.comps) {
              const double a = 1.0 / c.gamma;
              const double dens = c.mass * a * std::exp(-(a + tab.b) * u); // uncensored branch
              const double w1 = phi(std::span<const double>(&c.x, 1), v) * tab.gamma0(v) - g2;
              acc += dens * (squared ? w1 * w1 : w1);
            }
            if (tab.b > 0.0) {
              const double dens0 = tab.b * std::exp(-tab.b * u) * tab.fbar_at(v); // censored branch
              const double w0 = tab.gamma1(v) - g2;
              acc += dens0 * (squared ? w0 * w0 : w0);
            }
            return acc;
          },
          0.0, tab.u.back(), quad::Options{1e-9, 44});
    };
    out.mean = moment(false);
    out.sigma2 = std::max(moment(true) - out.mean * out.mean, 0.0);
    out.std_error = 0.0;
    return out;
  }

  if (reps < 2) throw size_error("asymptotic_variance_oracle: monte_carlo needs reps >= 2");

  // cumulative component masses for inverse-CDF draws
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& c : tab.comps) {
    acc += c.mass;
    cum.push_back(acc);
  }

  const std::size_t chunk = 4096;
  const std::size_t n_chunks = (reps + chunk - 1) / chunk;
  std::vector<double> s1(n_chunks, 0.0), s2(n_chunks, 0.0), s3(n_chunks, 0.0), s4(n_chunks, 0.0);

  par::for_index(static_cast<std::int64_t>(n_chunks), [&](std::int64_t ci) {
    const std::size_t begin = static_cast<std::size_t>(ci) * chunk;
    const std::size_t end = std::min(begin + chunk, reps);
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    for (std::size_t r = begin; r < end; ++r) {
      RngStream rng(seed, r);
      const double ux = rng.next_u01();
      std::size_t j = 0;
      while (j + 1 < cum.size() && ux > cum[j]) ++j;
      const double uy = rng.next_u01();
      const double uc = rng.next_u01();
      const double y = std::pow(uy, -tab.comps[j].gamma);
      const double c = model.censored() ? std::pow(uc, -model.gamma_G) : kInf;
      const double v = std::min(y, c);
      double w;
      if (y <= c) {
        const double xj = tab.comps[j].x;
        w = phi(std::span<const double>(&xj, 1), v) * tab.gamma0(v) - tab.gamma2(v);
      } else {
        w = tab.gamma1(v) - tab.gamma2(v);
      }
      const double w2 = w * w;
      a1 += w;
      a2 += w2;
      a3 += w2 * w;
      a4 += w2 * w2;
    }
    s1[ci] = a1;
    s2[ci] = a2;
    s3[ci] = a3;
    s4[ci] = a4;
  });

  const double dn = static_cast<double>(reps);
  const double m1 = par::pairwise_sum(s1) / dn;
  const double m2 = par::pairwise_sum(s2) / dn;
  const double m3 = par::pairwise_sum(s3) / dn;
  const double m4 = par::pairwise_sum(s4) / dn;
  const double var = std::max(m2 - m1 * m1, 0.0);
  // central fourth moment from raw moments
  const double mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
  out.mean = m1;
  out.sigma2 = var * dn / (dn - 1.0);
  out.std_error = std::sqrt(std::max(mu4 - var * var, 0.0) / dn);
  return out;
}

double h_rho(double rho, double y) {
  if (rho == 0.0) return std::log(y);
  return (std::pow(y, rho) - 1.0) / rho;
}

double second_order_bias(const PhiFunction& phi, const LimitModel& model, const RVFamily& family,
                         const std::function<double(double)>& lambda, bool include_x_factor) {
  if (!phi.dy) throw capability_error("second_order_bias: phi has no partial-derivative evaluator");
  const auto comps = mixture_components(model);
  double total = 0.0;
  for (const auto& c : comps) {
    const double lam = lambda(c.x);
    if (lam == 0.0) continue;
    const double rho = family.rho(c.x);
    const double x = c.x;
    const double inv_g = 1.0 / c.gamma;
    const double cval = quad::pareto_expectation(
        [&](double y) {
          const double lead = include_x_factor ? x : 1.0;
          return lead * phi.dy(std::span<const double>(&x, 1), y) * h_rho(rho, std::pow(y, inv_g));
        },
        inv_g);
    total += c.mass * lam * cval;
  }
  return total;
}

} // namespace extkm
