#include "extkm/diagnostics.hpp"

#include "extkm/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace extkm {

namespace {

bool is_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i] * (1.0 + 1e-9) + 1e-300) return false;
  return true;
}

} // namespace

const DiagnosticSeries& ConditionReport::find(const std::string& name) const {
  for (const auto& s : series)
    if (s.name == name) return s;
  throw value_error("ConditionReport: no series named " + name);
}

ConditionReport condition_diagnostics(const RVFamily& family, const std::vector<double>& x_grid,
                                      const std::vector<double>& u_grid) {
  if (x_grid.empty() || u_grid.empty()) throw size_error("condition_diagnostics: empty grid");
  for (double u : u_grid)
    if (!(u > 1.0)) throw domain_error("condition_diagnostics: u-grid entries must exceed 1");

  ConditionReport rep;
  DiagnosticSeries c_gap{"karamata_c_gap", u_grid, {}, false};
  DiagnosticSeries d_gap{"karamata_delta_gap", u_grid, {}, false};
  DiagnosticSeries e_gap{"eta_gap", u_grid, {}, false};
  DiagnosticSeries e_log{"eta_log_remainder", u_grid, {}, false};
  DiagnosticSeries l_ratio{"slowly_varying_ratio_gap", u_grid, {}, false};

  for (double u : u_grid) {
    double sc = 0.0, sd = 0.0, se = 0.0, sl = 0.0, sr = 0.0;
    for (double x : x_grid) {
      const double g = family.gamma(x);
      sc = std::max(sc, std::abs(family.karamata_c(x, u) - family.karamata_c_limit(x)));
      sd = std::max(sd, std::abs(family.karamata_delta(x, u) - 1.0 / g));
      const double eta_gap = std::abs(family.eta(x, u) - g);
      se = std::max(se, eta_gap);
      sl = std::max(sl, std::log(u) * eta_gap);
    }
    for (double xa : x_grid) {
      const double la = family.slowly_varying(xa, u);
      if (!(la > 0.0)) throw numeric_error("condition_diagnostics: nonpositive slowly varying value");
      for (double xb : x_grid) sr = std::max(sr, std::abs(family.slowly_varying(xb, u) / la - 1.0));
    }
    c_gap.sup_gap.push_back(sc);
    d_gap.sup_gap.push_back(sd);
    e_gap.sup_gap.push_back(se);
    e_log.sup_gap.push_back(sl);
    l_ratio.sup_gap.push_back(sr);
  }

  for (auto* s : {&c_gap, &d_gap, &e_gap, &e_log, &l_ratio}) {
    s->decreasing = is_decreasing(s->sup_gap);
    rep.series.push_back(*s);
  }
  return rep;
}

std::string ConditionReport::to_json_string() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : series) {
    j.push_back({{"name", s.name}, {"grid", s.grid}, {"sup_gap", s.sup_gap}, {"decreasing", s.decreasing}});
  }
  return nlohmann::json{{"diagnostics", j}}.dump(2);
}

} // namespace extkm
