#ifndef DATAMARKET_EXPERIMENTS_HPP_
#define DATAMARKET_EXPERIMENTS_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "datamarket/agents.hpp"
#include "datamarket/analysis.hpp"
#include "datamarket/config.hpp"
#include "datamarket/environment.hpp"
#include "datamarket/market.hpp"
#include "datamarket/metrics.hpp"
#include "datamarket/regimes.hpp"
#include "datamarket/rng.hpp"

// Multi-seed, multi-regime experiment grids under common random numbers:
// every substream is derived from (master seed, purpose label) alone, so
// regimes under the same seed share identical populations and draw
// sequences and within-seed contrasts isolate the rule.

namespace datamkt {

// Geometry, densities and tiers carry no randomness; built once and shared
// read-only across all runs.
struct WorldContext {
  Grid grid;
  std::vector<double> buyer_density;
  std::vector<double> seller_density;
  PairDistanceCache* dist = nullptr;

  WorldContext() = default;
  ~WorldContext() { delete dist; }
  WorldContext(const WorldContext&) = delete;
  WorldContext& operator=(const WorldContext&) = delete;
};

inline int nearest_cell(const Grid& g, double fx, double fy) {
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const Cell& c : g.cells) {
    min_x = std::min(min_x, c.x_km);
    max_x = std::max(max_x, c.x_km);
    min_y = std::min(min_y, c.y_km);
    max_y = std::max(max_y, c.y_km);
  }
  double tx = min_x + fx * (max_x - min_x);
  double ty = min_y + fy * (max_y - min_y);
  int best = 0;
  double best_d = 1e300;
  for (const Cell& c : g.cells) {
    double dx = c.x_km - tx, dy = c.y_km - ty;
    double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = c.id;
    }
  }
  return best;
}

inline std::vector<Hotspot> resolve_hotspots(const Grid& g,
                                             const std::vector<FracHotspot>& hs) {
  std::vector<Hotspot> out;
  for (const auto& h : hs)
    out.push_back(Hotspot{nearest_cell(g, h.fx, h.fy), h.intensity, h.decay});
  return out;
}

inline std::unique_ptr<WorldContext> build_world(const RunConfig& cfg) {
  auto w = std::make_unique<WorldContext>();
  w->grid = build_grid(cfg.width, cfg.height, cfg.cell_radius_km);
  if (cfg.density_source == "csv") {
    auto d = load_density_csv(cfg.density_csv, w->grid.n_cells());
    w->buyer_density = std::move(d.buyer);
    w->seller_density = std::move(d.seller);
  } else {
    w->buyer_density = synth_density(w->grid, resolve_hotspots(w->grid, cfg.buyer_hotspots));
    w->seller_density = synth_density(w->grid, resolve_hotspots(w->grid, cfg.seller_hotspots));
  }
  assign_tiers(w->grid, w->buyer_density, w->seller_density);
  w->dist = new PairDistanceCache(w->grid);
  return w;
}

struct RunResult {
  std::vector<KpiRow> panel;       // one row per period
  std::vector<TradeRecord> trades; // full log
  Population initial_pop;          // as seeded, for the agents.csv dump
};

inline RunResult run_one(const WorldContext& world, const RunConfig& cfg,
                         std::uint64_t seed, const RegimeConfig& regime) {
  regime.validate();
  Pcg32 rng_init = substream(seed, stream::kAgentInit);
  Pcg32 rng_risk = substream(seed, stream::kRisk);
  Pcg32 rng_access = substream(seed, stream::kAccess);

  SimState st;
  st.grid = &world.grid;
  st.dist = world.dist;
  st.bc = cfg.buyer;
  st.sc = cfg.seller;
  st.regime = regime;
  st.enforce_params = cfg.enforce;
  st.rng_shuffle = substream(seed, stream::kShuffle);
  st.rng_enforce = substream(seed, stream::kEnforce);

  Population pop = seed_agents(world.grid, cfg.buyer, cfg.seller, cfg.seeding, rng_init);
  st.risk = calibrate_risk(pop.sellers, cfg.gamma_r);
  if (cfg.risk_scale_override) st.risk.scale_r = *cfg.risk_scale_override;
  if (cfg.risk_cut_lo_override) {
    st.risk.cut_lo = *cfg.risk_cut_lo_override;
    st.risk.cut_hi = *cfg.risk_cut_hi_override;
  }
  for (Seller& s : pop.sellers) s.r_class = assign_risk(s, st.risk, rng_risk);
  init_regime_flags(pop.sellers, regime, rng_access);

  RunResult out;
  out.initial_pop = pop;
  st.buyers = std::move(pop.buyers);
  st.sellers = std::move(pop.sellers);
  st.connections.reset(static_cast<int>(st.buyers.size()),
                       static_cast<int>(st.sellers.size()));

  for (int t = 1; t <= cfg.plan.horizon; ++t) {
    enforcement_step(world.grid, st.sellers, st.period_cell_volume, t,
                     st.enforce_params, st.enforce_state, st.rng_enforce);
    std::size_t first = st.trade_log.size();
    market_step(st, t);
    out.panel.push_back(collect(st.trade_log.begin() + static_cast<long>(first),
                                st.trade_log.end(), seed, regime.label(),
                                regime.share, t));
  }
  out.trades = std::move(st.trade_log);
  return out;
}

// ---------------------------------------------------------------------------

struct RunTask {
  RegimeConfig regime;
  std::uint64_t seed = 0;
  std::string dir_label;  // runs/<dir_label>/<seed>/
};

inline std::vector<RunTask> expand_plan(const RunConfig& cfg) {
  std::vector<RunTask> tasks;
  std::vector<RegimeConfig> regimes;
  if (cfg.plan.regimes.empty()) {
    regimes.push_back(cfg.regime);
  } else {
    for (const auto& label : cfg.plan.regimes) {
      RegimeConfig rg = cfg.regime;
      rg.kind = regime_kind_from_string(label);
      rg.share = 0.0;
      if (rg.kind == RegimeKind::ShareRisk ||
          rg.kind == RegimeKind::ShareRiskEnforce) {
        for (double s : cfg.plan.share_grid) {
          RegimeConfig rs = rg;
          rs.share = s;
          regimes.push_back(rs);
        }
        continue;
      }
      regimes.push_back(rg);
    }
  }
  for (const auto& rg : regimes) {
    std::string label = rg.label();
    if (rg.kind == RegimeKind::ShareRisk ||
        rg.kind == RegimeKind::ShareRiskEnforce) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "_s%.2f", rg.share);
      label += buf;
    }
    for (int i = 0; i < cfg.plan.n_seeds; ++i)
      tasks.push_back(RunTask{rg, cfg.plan.seed_base + static_cast<std::uint64_t>(i), label});
  }
  return tasks;
}

inline int resolve_threads(int requested) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int n = requested > 0 ? requested : hw;
  if (const char* cap = std::getenv("DATAMARKET_THREADS")) {
    int c = std::atoi(cap);
    if (c > 0) n = std::min(n, c);
  }
  return std::max(1, n);
}

// In-memory bridge to the estimator (the CLI path goes through CSV).
inline Panel panel_from_rows(const std::vector<KpiRow>& rows) {
  Panel p;
  for (const auto& r : rows) {
    p.seed.push_back(r.seed);
    p.t.push_back(r.t);
    p.regime.push_back(r.regime);
    p.share.push_back(r.share);
    p.numeric["trades"].push_back(r.trades);
    p.numeric["volume"].push_back(r.volume);
    p.numeric["buyer_surplus"].push_back(r.buyer_surplus);
    p.numeric["seller_surplus"].push_back(r.seller_surplus);
    p.numeric["externality"].push_back(r.externality);
    p.numeric["total_welfare"].push_back(r.total_welfare);
  }
  return p;
}

struct RunSummary {
  std::string regime;
  double share = 0.0;
  std::uint64_t seed = 0;
  long trades = 0;
  long exchange_trades = 0;
  double welfare = 0.0;
};

struct GridResult {
  std::vector<KpiRow> panel;       // merged, in deterministic task order
  std::vector<RunSummary> runs;
};

// Executes the plan. When out_dir is non-empty, writes
// runs/<regime>/<seed>/{panel.csv,trades.csv,agents.csv}, a merged
// panel_all.csv and meta.json. Results do not depend on the worker count.
inline GridResult run_grid(const RunConfig& cfg, const std::string& out_dir,
                           bool verbose = false) {
  namespace fs = std::filesystem;
  auto t0 = std::chrono::steady_clock::now();
  auto world = build_world(cfg);
  auto tasks = expand_plan(cfg);

  std::vector<RunResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      results[i] = run_one(*world, cfg, tasks[i].seed, tasks[i].regime);
      if (!out_dir.empty()) {
        fs::path dir = fs::path(out_dir) / "runs" / tasks[i].dir_label /
                       std::to_string(tasks[i].seed);
        fs::create_directories(dir);
        write_panel_csv((dir / "panel.csv").string(), results[i].panel);
        write_trades_csv((dir / "trades.csv").string(), results[i].trades,
                         tasks[i].regime.label(), tasks[i].seed);
        write_agents_csv((dir / "agents.csv").string(), results[i].initial_pop);
      }
      if (verbose) {
        double welfare = 0.0;
        for (const auto& r : results[i].panel) welfare += r.total_welfare;
        std::lock_guard<std::mutex> lk(io_mutex);
        std::printf("run regime=%s share=%.2f seed=%llu trades=%zu welfare=%.3f\n",
                    tasks[i].regime.label().c_str(), tasks[i].regime.share,
                    static_cast<unsigned long long>(tasks[i].seed),
                    results[i].trades.size(), welfare);
      }
    }
  };
  int nthreads = resolve_threads(cfg.plan.threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  GridResult gr;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    RunSummary s;
    s.regime = tasks[i].regime.label();
    s.share = tasks[i].regime.share;
    s.seed = tasks[i].seed;
    for (const auto& rec : results[i].trades) {
      ++s.trades;
      if (rec.on_exchange) ++s.exchange_trades;
    }
    for (const auto& row : results[i].panel) s.welfare += row.total_welfare;
    gr.runs.push_back(s);
    for (auto& row : results[i].panel) gr.panel.push_back(std::move(row));
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_panel_csv((fs::path(out_dir) / "panel_all.csv").string(), gr.panel);
    double wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    std::string echo = config_echo(cfg);
    nlohmann::json meta;
    meta["config"] = echo;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(echo)));
    meta["config_hash"] = hash;
    meta["runs"] = tasks.size();
    meta["panel_rows"] = gr.panel.size();
    meta["threads"] = nthreads;
    meta["wall_ms"] = wall_ms;
    std::ofstream mf(fs::path(out_dir) / "meta.json");
    if (!mf) throw std::runtime_error("cannot write meta.json in " + out_dir);
    mf << meta.dump(2) << '\n';
  }
  return gr;
}

}  // namespace datamkt

#endif  // DATAMARKET_EXPERIMENTS_HPP_
