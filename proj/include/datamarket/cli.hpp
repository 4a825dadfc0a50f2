#ifndef DATAMARKET_CLI_HPP_
#define DATAMARKET_CLI_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "datamarket/analysis.hpp"
#include "datamarket/config.hpp"
#include "datamarket/experiments.hpp"
#include "datamarket/geojson.hpp"

// Subcommand bodies. Exit codes: 0 ok, 2 usage/config, 3 runtime failure.

namespace datamkt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline int cmd_run(const std::string& config_path, const std::string& out_dir,
                   const std::vector<std::string>& overrides) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, overrides);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  try {
    auto result = run_grid(cfg, out_dir, /*verbose=*/true);
    std::printf("wrote %zu panel rows from %zu runs to %s\n",
                result.panel.size(), result.runs.size(), out_dir.c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return kExitRuntime;
  }
}

inline int cmd_analyze(const std::string& panel_path,
                       const std::vector<std::string>& outcomes,
                       const std::string& treatment,
                       const std::string& out_path) {
  try {
    Panel panel = load_panel_csv(panel_path);
    std::ofstream out(out_path);
    if (!out) {
      std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
      return kExitRuntime;
    }
    out << "outcome,regressor,coef,se,t,n,r2\n";
    for (const auto& outcome : outcomes) {
      FeEstimate est = fe_regress_panel(panel, outcome, treatment);
      for (const auto& term : est.terms) {
        out << outcome << ',' << term.name << ',' << csv::fmt(term.coef) << ','
            << csv::fmt(term.se) << ',' << csv::fmt(term.t_stat) << ','
            << est.n_obs << ',' << csv::fmt(est.r2_within) << '\n';
        std::printf("%-16s %-20s coef=%12.5f se=%10.5f t=%8.3f\n",
                    outcome.c_str(), term.name.c_str(), term.coef, term.se,
                    term.t_stat);
      }
    }
    return kExitOk;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "analyze failed: %s\n", e.what());
    std::fprintf(stderr,
                 "panel columns: seed,regime,share,t,trades,volume,"
                 "buyer_surplus,seller_surplus,externality,total_welfare\n");
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "analyze failed: %s\n", e.what());
    return kExitRuntime;
  }
}

inline int cmd_export_arcs(const std::string& trades_path,
                           const std::string& config_path, int t_min,
                           int t_max,
                           const std::vector<std::string>& overrides,
                           const std::string& out_path) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, overrides);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  try {
    Grid grid = build_grid(cfg.width, cfg.height, cfg.cell_radius_km);
    export_trade_arcs(grid, trades_path, out_path, t_min, t_max);
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "export-arcs failed: %s\n", e.what());
    return kExitRuntime;
  }
}

inline int cmd_print_config_reference() {
  std::fputs(config_reference().c_str(), stdout);
  return kExitOk;
}

}  // namespace datamkt

#endif  // DATAMARKET_CLI_HPP_
