// Command-line front end: batch experiment runner for the simulation
// studies and an analysis entry point for user CSV data.
//
// Exit codes: 0 success, 2 usage error, 3 data/numeric error.

#include "extkm/csv.hpp"
#include "extkm/diagnostics.hpp"
#include "extkm/errors.hpp"
#include "extkm/estimators.hpp"
#include "extkm/km.hpp"
#include "extkm/limit_model.hpp"
#include "extkm/parallel.hpp"
#include "extkm/potter.hpp"
#include "extkm/rng.hpp"
#include "extkm/rv_family.hpp"
#include "extkm/sample.hpp"
#include "extkm/simulation.hpp"
#include "extkm/stats.hpp"
#include "extkm/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using extkm::error;
using Params = std::vector<std::pair<std::string, std::string>>;

// shortest decimal form that parses back to the same double
std::string fmt(double v) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

struct KGrid {
  std::size_t start = 0, stop = 0, step = 0;
  std::vector<std::size_t> values() const {
    std::vector<std::size_t> out;
    for (std::size_t k = start; k <= stop; k += step) out.push_back(k);
    return out;
  }
  std::string text() const {
    return std::to_string(start) + ":" + std::to_string(stop) + ":" + std::to_string(step);
  }
};

KGrid parse_kgrid(const std::string& text) {
  KGrid g;
  if (std::sscanf(text.c_str(), "%zu:%zu:%zu", &g.start, &g.stop, &g.step) != 3 || g.step == 0 || g.start < 1 ||
      g.stop < g.start)
    throw CLI::ValidationError("--k-grid", "expected start:stop:step with start>=1, stop>=start, step>=1");
  return g;
}

std::vector<double> parse_grid(const std::string& text) {
  double a, b, s;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &s) != 3 || !(s > 0.0) || !(b >= a))
    throw CLI::ValidationError("--grid", "expected start:stop:step");
  std::vector<double> out;
  for (double x = a; x <= b + 1e-12; x += s) out.push_back(x);
  return out;
}

extkm::Region parse_region(const std::string& text) {
  double lo, hi;
  if (std::sscanf(text.c_str(), "%lf,%lf", &lo, &hi) != 2 || !(lo < hi))
    throw CLI::ValidationError("--region", "expected lo,hi with lo < hi");
  return extkm::Region(lo, hi);
}

std::string header_comment(const std::string& cmd, const Params& params) {
  std::string line = "# extkm ";
  line += extkm::version;
  line += " cmd=" + cmd;
  for (const auto& [key, value] : params) line += " " + key + "=" + value;
  return line;
}

// Tabular output, CSV (default) or JSON, with a full parameter echo.
struct Table {
  std::string cmd;
  Params params;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  void write(const std::string& path, const std::string& format) const {
    std::ostringstream body;
    if (format == "json") {
      nlohmann::json meta;
      meta["version"] = extkm::version;
      meta["cmd"] = cmd;
      for (const auto& [key, value] : params) meta[key] = value;
      nlohmann::json data = nlohmann::json::array();
      for (const auto& row : rows) {
        nlohmann::json obj;
        for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
        data.push_back(obj);
      }
      body << nlohmann::json{{"meta", meta}, {"data", data}}.dump(2) << "\n";
    } else {
      body << header_comment(cmd, params) << "\n";
      for (std::size_t c = 0; c < columns.size(); ++c) body << (c ? "," : "") << columns[c];
      body << "\n";
      for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) body << (c ? "," : "") << row[c];
        body << "\n";
      }
    }
    if (path.empty() || path == "-") {
      std::cout << body.str();
    } else {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw error("cannot open output file: " + path);
      out << body.str();
    }
  }
};

// ---- shared input options ------------------------------------------------

struct DataOptions {
  std::string input;
  std::string z_col = "z", delta_col = "delta";
  std::vector<std::string> x_cols;
  std::string simulate; // burr_paper | pareto
  std::int64_t n = 100000;
  std::uint64_t seed = 1;
  double gamma_f = 0.5, gamma_g = 1.0;
  bool uncensored = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", input, "input CSV path");
    cmd->add_option("--z-col", z_col, "column with the observed minimum");
    cmd->add_option("--delta-col", delta_col, "column with the event indicator");
    cmd->add_option("--x-col", x_cols, "covariate column(s), default x");
    cmd->add_option("--simulate", simulate, "generate data instead: burr_paper or pareto");
    cmd->add_option("--n", n, "sample size for --simulate");
    cmd->add_option("--seed", seed, "RNG seed for --simulate");
    cmd->add_option("--gamma-f", gamma_f, "response tail index (pareto config)");
    cmd->add_option("--gamma-g", gamma_g, "censoring tail index (pareto config)");
    cmd->add_flag("--uncensored", uncensored, "disable censoring (pareto config)");
  }

  extkm::ModelConfig config() const {
    if (simulate == "burr_paper") return extkm::burr_paper_config(n, seed);
    if (simulate == "pareto") return extkm::exact_pareto_config(gamma_f, gamma_g, n, seed, !uncensored);
    throw CLI::ValidationError("--simulate", "unknown config '" + simulate + "' (use burr_paper or pareto)");
  }

  extkm::CensoredSample load(Params& params) const {
    if (!input.empty() && !simulate.empty())
      throw CLI::ValidationError("--input", "--input and --simulate are mutually exclusive");
    if (input.empty() && simulate.empty())
      throw CLI::ValidationError("--input", "one of --input or --simulate is required");
    if (!input.empty()) {
      params.emplace_back("input", input);
      extkm::CsvSchema schema;
      schema.z = z_col;
      schema.delta = delta_col;
      schema.covariates = x_cols.empty() ? std::vector<std::string>{"x"} : x_cols;
      return extkm::load_csv(input, schema);
    }
    params.emplace_back("config", simulate);
    params.emplace_back("n", std::to_string(n));
    params.emplace_back("seed", fmt_u64(seed));
    if (simulate == "pareto") {
      params.emplace_back("gamma_f", fmt(gamma_f));
      params.emplace_back("gamma_g", uncensored ? "inf" : fmt(gamma_g));
    }
    return extkm::sample_model(config());
  }
};

template <typename Fn>
void sweep(const std::vector<std::size_t>& ks, std::vector<std::vector<std::string>>& rows, Fn&& fn) {
  rows.resize(ks.size());
  std::vector<std::exception_ptr> errs(ks.size());
  extkm::par::for_index(static_cast<std::int64_t>(ks.size()), [&](std::int64_t i) {
    try {
      rows[i] = fn(ks[i]);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  });
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// ---- subcommand runners ----------------------------------------------------

int run_simulate(DataOptions data, const std::string& out, const std::string& format) {
  if (data.simulate.empty()) data.simulate = "burr_paper";
  Params params;
  params.emplace_back("config", data.simulate);
  params.emplace_back("n", std::to_string(data.n));
  params.emplace_back("seed", fmt_u64(data.seed));
  const auto sample = extkm::sample_model(data.config());
  Table table;
  table.cmd = "simulate";
  table.params = params;
  table.columns = {"z", "delta", "x"};
  for (std::size_t i = 0; i < sample.size(); ++i)
    table.add_row({fmt(sample.z[i]), std::to_string(static_cast<int>(sample.delta[i])), fmt(sample.x[i])});
  table.write(out, format);
  return 0;
}

int run_region(const DataOptions& data, const KGrid& kgrid, const std::string& region_text, double level,
               const std::string& out, const std::string& format) {
  Params params;
  const auto sample = data.load(params);
  params.emplace_back("k_grid", kgrid.text());
  params.emplace_back("region", region_text);
  params.emplace_back("level", fmt(level));
  const auto region = parse_region(region_text);
  const auto sorted = extkm::sort_with_concomitants(sample);

  Table table;
  table.cmd = "region";
  table.params = params;
  table.columns = {"k", "estimate", "se", "lo", "hi", "naive"};
  sweep(kgrid.values(), table.rows, [&](std::size_t k) -> std::vector<std::string> {
    const auto est = extkm::region_probability(sorted, k, region, level);
    const double naive = extkm::naive_region_estimator(sorted, k, region);
    return {std::to_string(k), fmt(est.value), fmt(est.std_error), fmt(est.lower), fmt(est.upper), fmt(naive)};
  });
  table.write(out, format);
  return 0;
}

int run_hill(const DataOptions& data, const KGrid& kgrid, const std::string& out, const std::string& format) {
  Params params;
  const auto sample = data.load(params);
  params.emplace_back("k_grid", kgrid.text());
  const auto sorted = extkm::sort_with_concomitants(sample);
  Table table;
  table.cmd = "hill";
  table.params = params;
  table.columns = {"k", "hill"};
  sweep(kgrid.values(), table.rows, [&](std::size_t k) -> std::vector<std::string> {
    return {std::to_string(k), fmt(extkm::hill_estimator(sorted, k))};
  });
  table.write(out, format);
  return 0;
}

int run_censored_prop(const DataOptions& data, const KGrid& kgrid, const std::string& out,
                      const std::string& format) {
  Params params;
  const auto sample = data.load(params);
  params.emplace_back("k_grid", kgrid.text());
  const auto sorted = extkm::sort_with_concomitants(sample);
  Table table;
  table.cmd = "censored-prop";
  table.params = params;
  table.columns = {"k", "censored_prop"};
  sweep(kgrid.values(), table.rows, [&](std::size_t k) -> std::vector<std::string> {
    return {std::to_string(k), fmt(extkm::censored_proportion(sorted, k))};
  });
  table.write(out, format);
  return 0;
}

int run_tail_curve(const DataOptions& data, std::size_t k, const std::string& grid_text,
                   const std::string& bandwidth_text, double level, const std::string& out,
                   const std::string& format) {
  Params params;
  const auto sample = data.load(params);
  params.emplace_back("k", std::to_string(k));
  params.emplace_back("grid", grid_text);
  params.emplace_back("bandwidth", bandwidth_text);
  params.emplace_back("level", fmt(level));
  const auto grid = parse_grid(grid_text);
  double h = extkm::kAutoBandwidth;
  if (bandwidth_text != "auto") {
    try {
      h = std::stod(bandwidth_text);
    } catch (...) {
      throw CLI::ValidationError("--bandwidth", "expected a positive number or 'auto'");
    }
    if (!(h > 0.0)) throw CLI::ValidationError("--bandwidth", "must be positive");
  }
  const auto sorted = extkm::sort_with_concomitants(sample);
  const auto curve = extkm::tail_index_curve(sorted, k, grid, h, level);

  Table table;
  table.cmd = "tail-curve";
  table.params = params;
  table.columns = {"a", "k", "estimate", "lo", "hi", "bandwidth"};
  for (const auto& point : curve)
    table.add_row({fmt(point.center), std::to_string(k), fmt(point.estimate.value), fmt(point.estimate.lower),
                   fmt(point.estimate.upper), fmt(point.bandwidth)});
  table.write(out, format);
  return 0;
}

int run_categories(const DataOptions& data, const KGrid& kgrid, std::vector<double> categories,
                   const std::string& out, const std::string& format) {
  Params params;
  const auto sample = data.load(params);
  params.emplace_back("k_grid", kgrid.text());
  if (categories.empty()) {
    // default: distinct covariate codes present in the sample
    std::vector<double> codes(sample.x.begin(), sample.x.end());
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    if (codes.size() > 100) throw error("categories: more than 100 distinct covariate codes; pass --categories");
    categories = std::move(codes);
  }
  {
    std::string list;
    for (double c : categories) list += (list.empty() ? "" : ";") + fmt(c);
    params.emplace_back("categories", list);
  }
  const auto sorted = extkm::sort_with_concomitants(sample);

  Table table;
  table.cmd = "categories";
  table.params = params;
  table.columns = {"k", "label", "raw", "prob"};
  for (std::size_t k : kgrid.values()) {
    const auto dist = extkm::category_distribution(sorted, k, categories);
    for (const auto& [label, raw] : dist.raw)
      table.add_row({std::to_string(k), fmt(label), fmt(raw), fmt(dist.normalized.at(label))});
  }
  table.write(out, format);
  return 0;
}

extkm::PhiFunction make_phi(const std::string& name, double phi_y) {
  if (name == "indicator") return extkm::phi_indicator_y_le(phi_y);
  if (name == "log") return extkm::phi_log_y();
  throw CLI::ValidationError("--phi", "unknown phi '" + name + "' (use indicator or log)");
}

int run_clt_study(const DataOptions& data, std::size_t k, std::size_t reps, double level,
                  const std::string& phi_name, double phi_y, const std::string& out, const std::string& format) {
  if (data.simulate.empty()) throw CLI::ValidationError("--simulate", "clt-study requires --simulate");
  Params params;
  params.emplace_back("config", data.simulate);
  params.emplace_back("n", std::to_string(data.n));
  params.emplace_back("seed", fmt_u64(data.seed));
  params.emplace_back("k", std::to_string(k));
  params.emplace_back("reps", std::to_string(reps));
  params.emplace_back("level", fmt(level));
  params.emplace_back("phi", phi_name == "indicator" ? "indicator(y<=" + fmt(phi_y) + ")" : phi_name);

  const auto report = extkm::monte_carlo_clt(data.config(), make_phi(phi_name, phi_y), k, reps, level);
  params.emplace_back("center", fmt(report.center));
  params.emplace_back("coverage", fmt(report.coverage));
  params.emplace_back("ad_statistic", fmt(report.normality.statistic));
  params.emplace_back("ad_p_value", fmt(report.normality.p_value));

  const double q = extkm::stats::qnorm(0.5 + level / 2.0);
  Table table;
  table.cmd = "clt-study";
  table.params = params;
  table.columns = {"rep", "seed", "estimate", "se", "lo", "hi", "covered"};
  for (std::size_t r = 0; r < reps; ++r) {
    const double est = report.estimates[r], se = report.std_errors[r];
    const bool covered = se == 0.0 || std::abs(est - report.center) <= q * se;
    table.add_row({std::to_string(r), fmt_u64(report.replicate_seeds[r]), fmt(est), fmt(se), fmt(est - q * se),
                   fmt(est + q * se), covered ? "1" : "0"});
  }
  table.write(out, format);
  return 0;
}

int run_check_conditions(const std::string& family_name, double kappa, double tau, double gamma, double eps_a,
                         double eps_c, double t_min, double t_max, std::size_t t_points, double y_max,
                         std::size_t y_points, double threshold_n, const std::string& out) {
  extkm::RVFamily family;
  std::vector<double> x_grid;
  if (family_name == "burr") {
    family = extkm::burr_family(kappa, tau);
    x_grid = {1.0};
  } else if (family_name == "pareto") {
    family = extkm::pareto_family(gamma);
    x_grid = {1.0};
  } else if (family_name == "burr_paper") {
    family = extkm::burr_family([](double) { return 1.0; }, [](double x) { return 1.0 / extkm::gamma_F_profile(x); });
    x_grid = extkm::lin_spaced(1.0, 5.0, 41);
  } else {
    throw CLI::ValidationError("--family", "unknown family '" + family_name + "'");
  }

  const auto t_grid = extkm::log_spaced(t_min, t_max, t_points);
  const auto y_grid = extkm::log_spaced(1.0 + 1e-9, y_max, y_points);
  const auto bounds = extkm::potter_bound_report(family, eps_a, eps_c, threshold_n, t_grid, y_grid, x_grid);
  const auto diag = extkm::condition_diagnostics(family, x_grid, extkm::log_spaced(10.0, 1e6, 6));

  nlohmann::json j;
  j["meta"] = {{"version", extkm::version}, {"cmd", "check-conditions"}, {"family", family_name}};
  j["potter"] = nlohmann::json::parse(bounds.to_json_string());
  j["conditions"] = nlohmann::json::parse(diag.to_json_string());
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream stream(out, std::ios::binary);
    if (!stream) throw error("cannot open output file: " + out);
    stream << text;
  }
  return 0;
}

int run_decomp_check(const DataOptions& data, double t, double t_quantile, std::size_t k, std::size_t reps,
                     const std::string& phi_name, double phi_y, const std::string& out, const std::string& format) {
  if (data.simulate.empty()) throw CLI::ValidationError("--simulate", "decomp-check requires --simulate");
  auto cfg = data.config();
  Params params;
  params.emplace_back("config", data.simulate);
  params.emplace_back("seed", fmt_u64(data.seed));
  if (t <= 0.0) {
    // resolve the threshold from a reference-sample quantile
    auto ref_cfg = cfg;
    ref_cfg.n = 200000;
    ref_cfg.seed = extkm::derive_seed(cfg.seed, 0xa11ce);
    const auto ref = extkm::sample_model(ref_cfg);
    std::vector<double> z(ref.z.begin(), ref.z.end());
    t = extkm::stats::quantile_type7(z, t_quantile);
    params.emplace_back("t_quantile", fmt(t_quantile));
  }
  params.emplace_back("t", fmt(t));
  params.emplace_back("k", std::to_string(k));
  params.emplace_back("reps", std::to_string(reps));
  params.emplace_back("phi", phi_name == "indicator" ? "indicator(y<=" + fmt(phi_y) + ")" : phi_name);

  const auto report = extkm::decomposition_residual_check(cfg, make_phi(phi_name, phi_y), t, k, reps);
  params.emplace_back("median_abs", fmt(report.median_abs));
  params.emplace_back("mean_abs", fmt(report.mean_abs));
  params.emplace_back("acceptance_rate", fmt(report.acceptance_rate));

  Table table;
  table.cmd = "decomp-check";
  table.params = params;
  table.columns = {"rep", "sqrt_k_residual"};
  for (std::size_t r = 0; r < reps; ++r) table.add_row({std::to_string(r), fmt(report.sqrt_k_residuals[r])});
  table.write(out, format);
  return 0;
}

// ---- figure bundles --------------------------------------------------------

void write_manifest(const std::string& path, const Params& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open manifest: " + path);
  for (const auto& [key, value] : params) out << key << "=" << value << "\n";
}

Params read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open manifest: " + path);
  Params params;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.find('=');
    if (pos == std::string::npos) throw error("manifest: malformed line '" + line + "'");
    params.emplace_back(line.substr(0, pos), line.substr(pos + 1));
  }
  return params;
}

std::string manifest_get(const Params& params, const std::string& key, const std::string& fallback) {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  if (fallback.empty()) throw error("manifest: missing key '" + key + "'");
  return fallback;
}

int run_figures(std::string study, const std::string& manifest_path, const std::string& out_dir, std::int64_t n,
                std::uint64_t seed, std::size_t reps) {
  if (!manifest_path.empty()) {
    const auto manifest = read_manifest(manifest_path);
    study = manifest_get(manifest, "study", "");
    n = std::stoll(manifest_get(manifest, "n", std::to_string(n)));
    seed = std::stoull(manifest_get(manifest, "seed", fmt_u64(seed)));
    reps = std::stoull(manifest_get(manifest, "reps", std::to_string(reps)));
  }
  std::filesystem::create_directories(out_dir);

  Params params;
  params.emplace_back("study", study);
  params.emplace_back("version", extkm::version);
  params.emplace_back("n", std::to_string(n));
  params.emplace_back("seed", fmt_u64(seed));
  params.emplace_back("reps", std::to_string(reps));

  const auto panel_path = [&](const std::string& name) { return out_dir + "/" + name + ".csv"; };

  if (study == "fig_gamma") {
    Table table;
    table.cmd = "figures/fig_gamma";
    table.params = params;
    table.columns = {"x", "gamma_F", "gamma_C1"};
    const std::size_t points = 401;
    for (std::size_t i = 0; i < points; ++i) {
      const double x = 1.0 + 0.01 * static_cast<double>(i);
      table.add_row({fmt(x), fmt(extkm::gamma_F_profile(x)), fmt(extkm::gamma_C1_profile(x))});
    }
    table.write(panel_path("fig_gamma"), "csv");
  } else if (study == "fig_regions") {
    const auto sorted = extkm::sort_with_concomitants(extkm::sample_model(extkm::burr_paper_config(n, seed)));
    const KGrid kgrid{500, 20000, 500};
    const std::vector<std::pair<std::string, extkm::Region>> panels = {{"R1", extkm::Region(1.8, 2.2)},
                                                                       {"R2", extkm::Region(1.0, 1.4)}};
    for (const auto& [name, region] : panels) {
      Table table;
      table.cmd = "figures/fig_regions_" + name;
      table.params = params;
      table.columns = {"k", "estimate", "se", "lo", "hi", "naive"};
      sweep(kgrid.values(), table.rows, [&, &region = region](std::size_t k) -> std::vector<std::string> {
        const auto est = extkm::region_probability(sorted, k, region, 0.95);
        return {std::to_string(k), fmt(est.value), fmt(est.std_error), fmt(est.lower), fmt(est.upper),
                fmt(extkm::naive_region_estimator(sorted, k, region))};
      });
      table.write(panel_path("fig_regions_" + name), "csv");
    }
  } else if (study == "fig_kernel") {
    const auto sorted = extkm::sort_with_concomitants(extkm::sample_model(extkm::burr_paper_config(n, seed)));
    const auto grid = extkm::lin_spaced(1.0, 5.0, 81);
    const std::vector<std::pair<std::string, double>> panels = {
        {"h0.05", 0.05}, {"h0.1", 0.1}, {"h0.5", 0.5}, {"hauto", extkm::kAutoBandwidth}};
    for (const auto& [name, h] : panels) {
      // the auto-bandwidth panel follows the larger-k variant of the study
      const std::size_t k = static_cast<std::size_t>(h == extkm::kAutoBandwidth ? n / 5 : n / 20);
      const auto curve = extkm::tail_index_curve(sorted, k, grid, h, 0.95);
      Table table;
      table.cmd = "figures/fig_kernel_" + name;
      table.params = params;
      table.columns = {"a", "k", "estimate", "lo", "hi", "bandwidth"};
      for (const auto& point : curve)
        table.add_row({fmt(point.center), std::to_string(k), fmt(point.estimate.value), fmt(point.estimate.lower),
                       fmt(point.estimate.upper), fmt(point.bandwidth)});
      table.write(panel_path("fig_kernel_" + name), "csv");
    }
  } else if (study == "clt_coverage") {
    DataOptions data;
    data.simulate = "pareto";
    data.n = n;
    data.seed = seed;
    data.gamma_f = 0.5;
    data.gamma_g = 1.0;
    run_clt_study(data, 200, reps, 0.95, "indicator", 2.0, panel_path("clt_coverage"), "csv");
  } else {
    throw CLI::ValidationError("--study", "unknown study '" + study + "'");
  }

  write_manifest(out_dir + "/manifest.txt", params);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"extkm: tail estimation for right-censored data with covariates"};
  app.require_subcommand(1);

  std::string out, format = "csv";
  DataOptions data;
  std::string kgrid_text = "100:1000:100";
  std::string region_text = "1.8,2.2";
  double level = 0.95;
  std::size_t k = 1000, reps = 500;
  std::string grid_text = "1:5:0.05", bandwidth_text = "auto";
  std::vector<double> categories;
  std::string phi_name = "indicator";
  double phi_y = 2.0;

  const auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "output path ('-' = stdout)");
    cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* cmd_simulate = app.add_subcommand("simulate", "draw a sample from a model configuration");
  data.attach(cmd_simulate);
  add_output(cmd_simulate);

  auto* cmd_region = app.add_subcommand("region", "tail probability of a covariate region over a k sweep");
  data.attach(cmd_region);
  add_output(cmd_region);
  cmd_region->add_option("--k-grid", kgrid_text, "k sweep start:stop:step");
  cmd_region->add_option("--region", region_text, "covariate interval lo,hi");
  cmd_region->add_option("--level", level, "confidence level");

  auto* cmd_hill = app.add_subcommand("hill", "Hill plot data (no censoring adaptation)");
  data.attach(cmd_hill);
  add_output(cmd_hill);
  cmd_hill->add_option("--k-grid", kgrid_text, "k sweep start:stop:step");

  auto* cmd_cens = app.add_subcommand("censored-prop", "censored proportion among the top k");
  data.attach(cmd_cens);
  add_output(cmd_cens);
  cmd_cens->add_option("--k-grid", kgrid_text, "k sweep start:stop:step");

  auto* cmd_curve = app.add_subcommand("tail-curve", "kernel-smoothed tail index over covariate centers");
  data.attach(cmd_curve);
  add_output(cmd_curve);
  cmd_curve->add_option("--k", k, "number of top order statistics");
  cmd_curve->add_option("--grid", grid_text, "centers start:stop:step");
  cmd_curve->add_option("--bandwidth", bandwidth_text, "kernel bandwidth or 'auto'");
  cmd_curve->add_option("--level", level, "confidence level");

  auto* cmd_cat = app.add_subcommand("categories", "tail distribution over categorical covariate codes");
  data.attach(cmd_cat);
  add_output(cmd_cat);
  cmd_cat->add_option("--k-grid", kgrid_text, "k sweep start:stop:step");
  cmd_cat->add_option("--categories", categories, "explicit category codes");

  auto* cmd_clt = app.add_subcommand("clt-study", "coverage study of the plug-in intervals");
  data.attach(cmd_clt);
  add_output(cmd_clt);
  cmd_clt->add_option("--k", k, "number of top order statistics");
  cmd_clt->add_option("--reps", reps, "Monte Carlo replicates");
  cmd_clt->add_option("--level", level, "confidence level");
  cmd_clt->add_option("--phi", phi_name, "integrand: indicator or log");
  cmd_clt->add_option("--phi-y", phi_y, "indicator threshold");

  auto* cmd_cond = app.add_subcommand("check-conditions", "Potter bounds and uniform-convergence diagnostics");
  std::string family_name = "burr";
  double kappa = 1.0, tau = 2.0, gamma = 0.5;
  double eps_a = 0.05, eps_c = 0.05, t_min = 100.0, t_max = 1e6, y_max = 1e3, threshold_n = 50.0;
  std::size_t t_points = 13, y_points = 40;
  cmd_cond->add_option("--family", family_name, "burr, pareto or burr_paper");
  cmd_cond->add_option("--kappa", kappa, "Burr kappa");
  cmd_cond->add_option("--tau", tau, "Burr tau");
  cmd_cond->add_option("--gamma", gamma, "Pareto tail index");
  cmd_cond->add_option("--eps-a", eps_a, "Potter exponent slack");
  cmd_cond->add_option("--eps-c", eps_c, "Potter constant slack");
  cmd_cond->add_option("--t-min", t_min, "smallest threshold in the scan");
  cmd_cond->add_option("--t-max", t_max, "largest threshold in the scan");
  cmd_cond->add_option("--t-points", t_points, "threshold grid size");
  cmd_cond->add_option("--y-max", y_max, "largest ratio scale");
  cmd_cond->add_option("--y-points", y_points, "ratio grid size");
  cmd_cond->add_option("--threshold-n", threshold_n, "claimed Potter threshold N");
  cmd_cond->add_option("--out", out, "output path ('-' = stdout)");

  auto* cmd_decomp = app.add_subcommand("decomp-check", "exchangeable-sum decomposition residuals");
  data.attach(cmd_decomp);
  add_output(cmd_decomp);
  double t_threshold = 0.0, t_quantile = 0.999;
  cmd_decomp->add_option("--t", t_threshold, "conditioning threshold (0 = use --t-quantile)");
  cmd_decomp->add_option("--t-quantile", t_quantile, "reference-sample quantile for the threshold");
  cmd_decomp->add_option("--k", k, "conditional draws per replicate");
  cmd_decomp->add_option("--reps", reps, "replicates");
  cmd_decomp->add_option("--phi", phi_name, "integrand: indicator or log");
  cmd_decomp->add_option("--phi-y", phi_y, "indicator threshold");

  auto* cmd_fig = app.add_subcommand("figures", "canned studies emitting figure data files");
  std::string study = "fig_gamma", manifest_path, out_dir = "figures";
  std::int64_t fig_n = 100000;
  std::uint64_t fig_seed = 5;
  std::size_t fig_reps = 500;
  cmd_fig->add_option("--study", study, "fig_gamma, fig_regions, fig_kernel or clt_coverage");
  cmd_fig->add_option("--manifest", manifest_path, "re-run from a manifest file");
  cmd_fig->add_option("--out-dir", out_dir, "output directory");
  cmd_fig->add_option("--n", fig_n, "sample size");
  cmd_fig->add_option("--seed", fig_seed, "RNG seed");
  cmd_fig->add_option("--reps", fig_reps, "replicates (clt_coverage)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(cmd_simulate)) return run_simulate(data, out, format);
    if (app.got_subcommand(cmd_region))
      return run_region(data, parse_kgrid(kgrid_text), region_text, level, out, format);
    if (app.got_subcommand(cmd_hill)) return run_hill(data, parse_kgrid(kgrid_text), out, format);
    if (app.got_subcommand(cmd_cens)) return run_censored_prop(data, parse_kgrid(kgrid_text), out, format);
    if (app.got_subcommand(cmd_curve)) return run_tail_curve(data, k, grid_text, bandwidth_text, level, out, format);
    if (app.got_subcommand(cmd_cat)) return run_categories(data, parse_kgrid(kgrid_text), categories, out, format);
    if (app.got_subcommand(cmd_clt)) return run_clt_study(data, k, reps, level, phi_name, phi_y, out, format);
    if (app.got_subcommand(cmd_cond))
      return run_check_conditions(family_name, kappa, tau, gamma, eps_a, eps_c, t_min, t_max, t_points, y_max,
                                  y_points, threshold_n, out);
    if (app.got_subcommand(cmd_decomp))
      return run_decomp_check(data, t_threshold, t_quantile, k, reps, phi_name, phi_y, out, format);
    if (app.got_subcommand(cmd_fig)) return run_figures(study, manifest_path, out_dir, fig_n, fig_seed, fig_reps);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
