#include "extkm/quadrature.hpp"

#include "extkm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace extkm::quad {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const Fn1& f, double a, double fa, double b, double fb, double m, double fm,
                double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double integrate_panel(const Fn1& f, double a, double b, const Options& opt) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    throw numeric_error("integrate: non-finite integrand value");
  const double whole = simpson(a, fa, b, fb, fm);
  return adaptive(f, a, fa, b, fb, m, fm, whole, opt.abs_tol, opt.max_depth);
}

} // namespace

double integrate(const Fn1& f, double a, double b, Options opt, const std::vector<double>& breakpoints) {
  if (!(b >= a)) throw domain_error("integrate: b < a");
  std::vector<double> pts;
  pts.push_back(a);
  for (double p : breakpoints)
    if (p > a && p < b) pts.push_back(p);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  Options panel_opt = opt;
  panel_opt.abs_tol = opt.abs_tol / static_cast<double>(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate_panel(f, pts[i], pts[i + 1], panel_opt);
  return total;
}

double integrate_to_inf(const Fn1& f, double a, Options opt, double first_block) {
  double total = 0.0;
  double lo = a;
  double block = std::max(first_block, 1e-8);
  Options block_opt = opt;
  block_opt.abs_tol = opt.abs_tol * 0.25;
  for (int it = 0; it < 90; ++it) {
    const double hi = lo + block;
    const double piece = integrate_panel(f, lo, hi, block_opt);
    total += piece;
    if (it > 2 && std::abs(piece) < opt.abs_tol) return total;
    lo = hi;
    block *= 2.0;
  }
  throw numeric_error("integrate_to_inf: no convergence (integrand decays too slowly)");
}

double pareto_expectation(const Fn1& g, double tail_exponent, Options opt) {
  if (!(tail_exponent > 0.0)) throw domain_error("pareto_expectation: tail exponent must be positive");
  const double a = tail_exponent;
  const auto h = [&](double u) { return g(std::exp(u)) * a * std::exp(-a * u); };
  // survival at e^u is e^{-a u}; the 1e-12 point is u = 12 ln(10) / a
  const double u_trunc = 12.0 * std::log(10.0) / a;
  double total = integrate(h, 0.0, u_trunc, opt);
  // remainder blocks until negligible
  double lo = u_trunc;
  double block = u_trunc;
  for (int it = 0; it < 60; ++it) {
    const double piece = integrate(h, lo, lo + block, opt);
    total += piece;
    if (std::abs(piece) < opt.abs_tol) return total;
    lo += block;
    block *= 2.0;
  }
  throw numeric_error("pareto_expectation: truncation tail does not converge");
}

} // namespace extkm::quad
