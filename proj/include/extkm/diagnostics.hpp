#pragma once

#include "extkm/rv_family.hpp"

#include <string>
#include <vector>

namespace extkm {

/// One convergence diagnostic: the sup-norm gap over the x-grid at each
/// scale in `grid`, and whether the gaps decay monotonically.
struct DiagnosticSeries {
  std::string name;
  std::vector<double> grid;
  std::vector<double> sup_gap;
  bool decreasing = false;
};

struct ConditionReport {
  std::vector<DiagnosticSeries> series;

  const DiagnosticSeries& find(const std::string& name) const;
  std::string to_json_string() const;
};

/// Numeric checks of the uniform-convergence assumptions on a family:
/// c(x,y) to its limit, delta(x,u) to 1/gamma(x), eta_x(u) to gamma(x),
/// the log-weighted eta remainder log(u)(eta_x(u) - gamma(x)), and the
/// pairwise slowly-varying ratio L(x_b,u)/L(x_a,u) to 1. Exact Pareto
/// families report zero everywhere.
ConditionReport condition_diagnostics(const RVFamily& family, const std::vector<double>& x_grid,
                                      const std::vector<double>& u_grid);

} // namespace extkm
