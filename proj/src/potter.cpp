#include "extkm/potter.hpp"

#include "extkm/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace extkm {

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw domain_error("log_spaced: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_spaced(double lo, double hi, std::size_t count) {
  if (!(hi >= lo) || count < 1) throw domain_error("lin_spaced: need hi >= lo and count >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

namespace {

constexpr double kNumericZero = 1e-12;

// signed relative excess of ratio over [lower, upper]; positive = violated
double band_violation(double ratio, double lower, double upper) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw numeric_error("potter_bound_report: nonpositive ratio");
  double v = 0.0;
  if (ratio > upper) v = ratio / upper - 1.0;
  if (ratio < lower) v = std::max(v, lower / ratio - 1.0);
  if (std::abs(v) <= kNumericZero) v = 0.0;
  return v;
}

} // namespace

BoundReport potter_bound_report(const RVFamily& family, double eps_a, double eps_c, double N,
                                const std::vector<double>& t_grid, const std::vector<double>& y_grid,
                                const std::vector<double>& x_grid) {
  if (eps_a < 0.0 || eps_c < 0.0) throw domain_error("potter_bound_report: eps must be nonnegative");
  if (t_grid.empty() || y_grid.empty() || x_grid.empty()) throw size_error("potter_bound_report: empty grid");

  BoundReport rep;
  rep.eps_a = eps_a;
  rep.eps_c = eps_c;
  rep.threshold_N = N;
  rep.t_grid = t_grid;
  rep.y_grid = y_grid;
  rep.x_grid = x_grid;
  rep.max_violation = -std::numeric_limits<double>::infinity();

  std::size_t scanned_t = 0;
  for (double t : t_grid) {
    if (!(t > N)) continue;
    ++scanned_t;
    for (double x : x_grid) {
      const double g = family.gamma(x);
      const double log_surv_t = family.log_survival(x, t);
      const double u_t = family.tail_quantile(x, t);
      for (double y : y_grid) {
        if (!(y >= 1.0)) throw domain_error("potter_bound_report: y-grid entries must be >= 1");

        const double surv_ratio = std::exp(family.log_survival(x, t * y) - log_surv_t);
        const double s_up = (1.0 + eps_c) * std::pow(y, -1.0 / g + eps_a);
        const double s_lo = (1.0 - eps_c) * std::pow(y, -1.0 / g - eps_a);
        const double sv = band_violation(surv_ratio, s_lo, s_up);

        const double quant_ratio = family.tail_quantile(x, t * y) / u_t;
        const double q_up = (1.0 + eps_c) * std::pow(y, g + eps_a);
        const double q_lo = (1.0 - eps_c) * std::pow(y, g - eps_a);
        const double qv = band_violation(quant_ratio, q_lo, q_up);

        rep.points_checked += 2;
        if (sv > rep.max_violation) {
          rep.max_violation = sv;
          rep.worst = {"survival", x, t, y, surv_ratio, s_lo, s_up};
        }
        if (qv > rep.max_violation) {
          rep.max_violation = qv;
          rep.worst = {"quantile", x, t, y, quant_ratio, q_lo, q_up};
        }
      }
    }
  }
  if (scanned_t == 0) throw bounds_error("potter_bound_report: no t-grid entries above N");
  rep.pass = rep.max_violation <= 0.0;
  return rep;
}

std::string BoundReport::to_json_string() const {
  nlohmann::json j;
  j["eps_a"] = eps_a;
  j["eps_c"] = eps_c;
  j["threshold_N"] = threshold_N;
  j["points_checked"] = points_checked;
  j["max_violation"] = max_violation;
  j["pass"] = pass;
  j["worst"] = {{"chain", worst.chain}, {"x", worst.x},         {"t", worst.t},        {"y", worst.y},
                {"ratio", worst.ratio}, {"lower", worst.lower}, {"upper", worst.upper}};
  j["t_grid"] = t_grid;
  j["y_grid"] = y_grid;
  j["x_grid"] = x_grid;
  return j.dump(2);
}

} // namespace extkm
