#pragma once

#include "extkm/rv_family.hpp"

#include <string>
#include <vector>

namespace extkm {

/// Result of scanning the two-sided tail-ratio and quantile-ratio
/// sandwich bounds over a (x, t, y) grid. Violations are signed
/// relative excesses (positive = outside the band); values within
/// 1e-12 of zero are clamped to zero so that exact-equality families
/// report a clean pass.
struct BoundReport {
  double eps_a = 0.0;
  double eps_c = 0.0;
  double threshold_N = 0.0; // only t-grid entries above N are scanned
  std::size_t points_checked = 0;
  double max_violation = 0.0;
  bool pass = false;

  struct Worst {
    std::string chain; // "survival" or "quantile"
    double x = 0.0, t = 0.0, y = 0.0;
    double ratio = 0.0, lower = 0.0, upper = 0.0;
  } worst;

  std::vector<double> t_grid, y_grid, x_grid;

  std::string to_json_string() const;
};

/// Checks, over the grid product, the sandwich
///   (1-eps_c) y^{-1/gamma(x)-eps_a} <= Fbar(x,ty)/Fbar(x,t) <= (1+eps_c) y^{-1/gamma(x)+eps_a}
/// and its tail-quantile counterpart with exponents gamma(x) -+ eps_a.
/// Entries of t_grid at or below N are skipped; at least one entry must
/// remain.
BoundReport potter_bound_report(const RVFamily& family, double eps_a, double eps_c, double N,
                                const std::vector<double>& t_grid, const std::vector<double>& y_grid,
                                const std::vector<double>& x_grid);

/// Log-spaced grid helper, lo and hi included.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Evenly spaced grid helper, lo and hi included.
std::vector<double> lin_spaced(double lo, double hi, std::size_t count);

} // namespace extkm
