// datamarket: spatial data-trading market simulator and analysis toolkit.

#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "datamarket/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Agent-based data-market simulator: legal-regime counterfactuals on a hexagonal sandbox"};
  app.require_subcommand(1);

  // run
  std::string run_config, run_out = "out";
  std::vector<std::string> run_sets;
  auto* run = app.add_subcommand("run", "Execute the experiment plan from a config file");
  run->add_option("--config", run_config, "run configuration file")->required();
  run->add_option("--out", run_out, "output directory");
  run->add_option("--set", run_sets, "override: section.key=value (repeatable)");

  // analyze
  std::string an_panel, an_treatment = "regime", an_out = "estimates.csv";
  std::vector<std::string> an_outcomes;
  auto* analyze = app.add_subcommand("analyze", "Two-way FE regression on a panel CSV");
  analyze->add_option("--panel", an_panel, "panel_all.csv path")->required();
  analyze->add_option("--outcome", an_outcomes,
                      "outcome column (repeatable; default: all KPI columns)");
  analyze->add_option("--treatment", an_treatment,
                      "'regime' (dummies vs baseline), 'share', or a column name");
  analyze->add_option("--out", an_out, "estimates CSV path");

  // export-arcs
  std::string ex_trades, ex_config, ex_out = "arcs.geojson";
  std::vector<std::string> ex_sets;
  int ex_tmin = 0, ex_tmax = std::numeric_limits<int>::max();
  auto* arcs = app.add_subcommand("export-arcs", "Trade-arc GeoJSON from a trade log");
  arcs->add_option("--trades", ex_trades, "trades.csv path")->required();
  arcs->add_option("--config", ex_config, "config file (grid geometry)")->required();
  arcs->add_option("--t-min", ex_tmin, "keep deals with t >= t-min");
  arcs->add_option("--t-max", ex_tmax, "keep deals with t <= t-max");
  arcs->add_option("--set", ex_sets, "config override (repeatable)");
  arcs->add_option("--out", ex_out, "output GeoJSON path");

  auto* ref = app.add_subcommand("print-config-reference",
                                 "List every config key with default and meaning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? datamkt::kExitOk : datamkt::kExitConfig;
  }

  if (run->parsed()) return datamkt::cmd_run(run_config, run_out, run_sets);
  if (analyze->parsed()) {
    if (an_outcomes.empty())
      an_outcomes = {"trades", "volume", "buyer_surplus", "seller_surplus",
                     "externality", "total_welfare"};
    return datamkt::cmd_analyze(an_panel, an_outcomes, an_treatment, an_out);
  }
  if (arcs->parsed())
    return datamkt::cmd_export_arcs(ex_trades, ex_config, ex_tmin, ex_tmax,
                                    ex_sets, ex_out);
  if (ref->parsed()) return datamkt::cmd_print_config_reference();
  return datamkt::kExitConfig;
}
