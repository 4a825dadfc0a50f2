#ifndef DATAMARKET_CONFIG_HPP_
#define DATAMARKET_CONFIG_HPP_

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "datamarket/agents.hpp"
#include "datamarket/calibration.hpp"
#include "datamarket/environment.hpp"
#include "datamarket/regimes.hpp"

// Structured-text run configuration. Every knob of every module appears
// here with an explicit schema; unknown keys are rejected with the line
// number (a silent typo in a 50-knob simulator is the main operational
// hazard). Values are `key = value` under `[section]` headers, `#` or `;`
// start a comment, and repeatable keys (hotspots) may appear many times.

namespace datamkt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A hotspot placed at a fraction of the grid extent, resolved to the
// nearest cell once the grid exists. Keeps configs grid-size independent.
struct FracHotspot {
  double fx = 0.5;
  double fy = 0.5;
  double intensity = 1.0;
  double decay = 0.1;
};

struct PlanConfig {
  int horizon = 100;
  int n_seeds = 30;
  std::uint64_t seed_base = 0;
  std::vector<std::string> regimes;  // empty -> run the [regime] section only
  std::vector<double> share_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                    0.6, 0.7, 0.8, 0.9, 1.0};
  std::string preset;  // table3 | table4 | table5_risk | table5_risk_enforce
  int threads = 0;     // 0 = hardware concurrency (capped by DATAMARKET_THREADS)
};

struct RunConfig {
  int width = 20;
  int height = 25;
  double cell_radius_km = 20.0;

  std::string density_source = "synth";  // synth | csv
  std::string density_csv;
  // Three coastal-style economic cores; buyer demand is more concentrated
  // than the seller-side institution base.
  std::vector<FracHotspot> buyer_hotspots = {
      {0.25, 0.30, 40.0, 0.05}, {0.70, 0.68, 30.0, 0.05}, {0.50, 0.15, 18.0, 0.05}};
  std::vector<FracHotspot> seller_hotspots = {
      {0.25, 0.30, 36.0, 0.015}, {0.70, 0.68, 27.0, 0.015}, {0.50, 0.15, 16.0, 0.015}};

  BuyerCoeffs buyer;
  SellerCoeffs seller;
  SeedParams seeding;

  double gamma_r = 5.0;
  EnforceParams enforce;
  std::optional<double> risk_scale_override;
  std::optional<double> risk_cut_lo_override;
  std::optional<double> risk_cut_hi_override;

  RegimeConfig regime;
  PlanConfig plan;
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

struct RawEntry {
  std::string value;
  int line = 0;
};

struct RawConfig {
  std::vector<std::pair<std::string, RawEntry>> entries;  // "section.key"
};

inline RawConfig parse_text(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty() || key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside a [section] or empty key");
    raw.entries.emplace_back(section + "." + key, RawEntry{value, lineno});
  }
  return raw;
}

inline double as_double(const std::string& key, const RawEntry& e) {
  try {
    std::size_t pos = 0;
    double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config line " + std::to_string(e.line) + ": key '" +
                      key + "' needs a number, got '" + e.value + "'");
  }
}

inline long as_int(const std::string& key, const RawEntry& e) {
  try {
    std::size_t pos = 0;
    long v = std::stol(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config line " + std::to_string(e.line) + ": key '" +
                      key + "' needs an integer, got '" + e.value + "'");
  }
}

inline bool as_bool(const std::string& key, const RawEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError("config line " + std::to_string(e.line) + ": key '" + key +
                    "' needs true/false");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cur = trim(cur);
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<double> as_double_list(const std::string& key,
                                          const RawEntry& e) {
  // either "a,b,c" or "lo:hi:step"
  std::vector<double> out;
  if (e.value.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream ss(e.value);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0.0)
      throw ConfigError("config line " + std::to_string(e.line) + ": key '" +
                        key + "' needs lo:hi:step");
    int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) out.push_back(lo + step * i);
    return out;
  }
  for (const auto& tok : split_list(e.value))
    out.push_back(as_double(key, RawEntry{tok, e.line}));
  if (out.empty())
    throw ConfigError("config line " + std::to_string(e.line) + ": key '" +
                      key + "' needs at least one value");
  return out;
}

inline FracHotspot as_hotspot(const std::string& key, const RawEntry& e) {
  std::istringstream ss(e.value);
  FracHotspot h;
  if (!(ss >> h.fx >> h.fy >> h.intensity >> h.decay) || !(ss >> std::ws).eof())
    throw ConfigError("config line " + std::to_string(e.line) + ": key '" +
                      key + "' needs 'fx fy intensity decay'");
  return h;
}

struct KeyDoc {
  const char* key;
  const char* def;
  const char* doc;
};

inline const std::vector<KeyDoc>& schema() {
  static const std::vector<KeyDoc> s = {
      {"grid.width", "20", "lattice width in cells"},
      {"grid.height", "25", "lattice height in cells"},
      {"grid.cell_radius_km", "20.0", "hex circumradius in km"},
      {"density.source", "synth", "synth | csv"},
      {"density.csv_path", "", "per-cell densities (cell_id,buyer_density,seller_density)"},
      {"density.buyer.hotspot", "3 built-in hotspots", "repeatable: fx fy intensity decay"},
      {"density.seller.hotspot", "3 built-in hotspots", "repeatable: fx fy intensity decay"},
      {"coefficients.buyer.rho", "0.0087", "stock decay in f(x)=exp(-rho x)"},
      {"coefficients.buyer.beta", "0.8093", "volume weight"},
      {"coefficients.buyer.tau", "0.454", "seller-tier weight"},
      {"coefficients.buyer.gamma", "0", "buyer-tier weight (full form)"},
      {"coefficients.buyer.phi", "0", "tier interaction weight (full form)"},
      {"coefficients.buyer.mu_alpha", "0.6461", "mean of raw price coefficient"},
      {"coefficients.buyer.sigma_alpha", "0.0204", "sd of raw price coefficient"},
      {"coefficients.buyer.kappa", "1.2212", "distance weight"},
      {"coefficients.seller.c0", "4.883", "fixed cost"},
      {"coefficients.seller.c1", "0", "seller-tier cost (full form)"},
      {"coefficients.seller.c2", "0.32", "volume cost"},
      {"coefficients.seller.beta_r", "0.708", "risk loading"},
      {"coefficients.seller.beta_e", "2.976", "enforcement loading"},
      {"coefficients.seller.delta", "0", "risk x enforcement interaction (full form)"},
      {"coefficients.seller.mu_alpha", "0.727", "mean of raw price coefficient"},
      {"coefficients.seller.sigma_alpha", "0.432", "sd of raw price coefficient"},
      {"agents.budget_edges", "1e4,1e5,4.6416e5,2.1544e6,1e7,1e8",
       "6 ascending band edges; level L draws log-uniform in [e_L, e_{L+1})"},
      {"agents.initial_stock", "0.0", "buyer starting data stock"},
      {"agents.pkg_min", "2.5", "seller package volume range, lower"},
      {"agents.pkg_max", "26.0", "seller package volume range, upper"},
      {"agents.pkg_level_step", "0.1", "range scale 1 + step*(level-1)"},
      {"env.gamma_r", "5.0", "risk ordered-logit slope"},
      {"env.gamma_e", "1.0", "enforcement ordered-logit slope"},
      {"env.window", "1", "periods in the enforcement activity window"},
      {"env.t_e", "1", "enforcement recalculation frequency"},
      {"env.risk_scale", "auto", "override calibrated risk scale"},
      {"env.risk_cut_lo", "auto", "override calibrated lower risk cut"},
      {"env.risk_cut_hi", "auto", "override calibrated upper risk cut"},
      {"regime.kind", "baseline",
       "baseline|pme|lrco|ic|ri|share_risk|share_risk_enforce"},
      {"regime.share", "0.0", "buyer liability share (share_* regimes)"},
      {"regime.consent_prob", "0.2", "IC: per-seller consent probability"},
      {"regime.join_prob", "0.0052", "PME: per-seller exchange join probability"},
      {"regime.platform_fee", "0.03", "PME: WTA markup for on-exchange sellers"},
      {"plan.t", "100", "periods per run"},
      {"plan.seeds", "30", "number of master seeds (seed_base..seed_base+n-1)"},
      {"plan.seed_base", "0", "first master seed"},
      {"plan.regimes", "(empty)", "comma list; empty runs [regime] as-is"},
      {"plan.share_grid", "0.0:1.0:0.1",
       "share values for share_* regimes (list or lo:hi:step)"},
      {"plan.preset", "(none)",
       "table3 | table4 | table5_risk | table5_risk_enforce; overrides plan lists"},
      {"plan.threads", "0", "worker threads; 0 = auto, capped by DATAMARKET_THREADS"},
  };
  return s;
}

inline bool known_key(const std::string& key) {
  for (const auto& k : schema())
    if (key == k.key) return true;
  return false;
}

}  // namespace cfgdetail

inline void apply_preset(RunConfig& cfg) {
  auto& p = cfg.plan;
  if (p.preset.empty()) return;
  p.horizon = 100;
  p.n_seeds = 30;
  if (p.preset == "table3") {
    p.regimes = {"baseline", "pme"};
  } else if (p.preset == "table4") {
    p.regimes = {"baseline", "ic", "lrco", "ri"};
  } else if (p.preset == "table5_risk") {
    p.regimes = {"share_risk"};
    p.share_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  } else if (p.preset == "table5_risk_enforce") {
    p.regimes = {"share_risk_enforce"};
    p.share_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  } else {
    throw ConfigError("unknown plan.preset '" + p.preset + "'");
  }
}

inline RunConfig config_from_text(const std::string& text,
                                  const std::vector<std::string>& overrides = {}) {
  using namespace cfgdetail;
  RawConfig raw = parse_text(text);
  int fake_line = 0;
  for (const auto& ov : overrides) {
    std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + ov + "': expected section.key=value");
    raw.entries.emplace_back(trim(ov.substr(0, eq)),
                             RawEntry{trim(ov.substr(eq + 1)), --fake_line});
  }

  RunConfig cfg;
  bool buyer_hotspots_cleared = false, seller_hotspots_cleared = false;
  for (const auto& [key, e] : raw.entries) {
    if (!known_key(key))
      throw ConfigError("config line " + std::to_string(e.line) +
                        ": unknown key '" + key + "'");
    if (key == "grid.width") cfg.width = static_cast<int>(as_int(key, e));
    else if (key == "grid.height") cfg.height = static_cast<int>(as_int(key, e));
    else if (key == "grid.cell_radius_km") cfg.cell_radius_km = as_double(key, e);
    else if (key == "density.source") {
      if (e.value != "synth" && e.value != "csv")
        throw ConfigError("config line " + std::to_string(e.line) +
                          ": density.source must be synth or csv");
      cfg.density_source = e.value;
    } else if (key == "density.csv_path") cfg.density_csv = e.value;
    else if (key == "density.buyer.hotspot") {
      if (!buyer_hotspots_cleared) { cfg.buyer_hotspots.clear(); buyer_hotspots_cleared = true; }
      cfg.buyer_hotspots.push_back(as_hotspot(key, e));
    } else if (key == "density.seller.hotspot") {
      if (!seller_hotspots_cleared) { cfg.seller_hotspots.clear(); seller_hotspots_cleared = true; }
      cfg.seller_hotspots.push_back(as_hotspot(key, e));
    }
    else if (key == "coefficients.buyer.rho") cfg.buyer.rho = as_double(key, e);
    else if (key == "coefficients.buyer.beta") cfg.buyer.beta = as_double(key, e);
    else if (key == "coefficients.buyer.tau") cfg.buyer.tau = as_double(key, e);
    else if (key == "coefficients.buyer.gamma") cfg.buyer.gamma = as_double(key, e);
    else if (key == "coefficients.buyer.phi") cfg.buyer.phi = as_double(key, e);
    else if (key == "coefficients.buyer.mu_alpha") cfg.buyer.mu_alpha = as_double(key, e);
    else if (key == "coefficients.buyer.sigma_alpha") cfg.buyer.sigma_alpha = as_double(key, e);
    else if (key == "coefficients.buyer.kappa") cfg.buyer.kappa = as_double(key, e);
    else if (key == "coefficients.seller.c0") cfg.seller.c0 = as_double(key, e);
    else if (key == "coefficients.seller.c1") cfg.seller.c1 = as_double(key, e);
    else if (key == "coefficients.seller.c2") cfg.seller.c2 = as_double(key, e);
    else if (key == "coefficients.seller.beta_r") cfg.seller.beta_r = as_double(key, e);
    else if (key == "coefficients.seller.beta_e") cfg.seller.beta_e = as_double(key, e);
    else if (key == "coefficients.seller.delta") cfg.seller.delta = as_double(key, e);
    else if (key == "coefficients.seller.mu_alpha") cfg.seller.mu_alpha = as_double(key, e);
    else if (key == "coefficients.seller.sigma_alpha") cfg.seller.sigma_alpha = as_double(key, e);
    else if (key == "agents.budget_edges") {
      auto v = as_double_list(key, e);
      if (v.size() != 6)
        throw ConfigError("config line " + std::to_string(e.line) +
                          ": agents.budget_edges needs exactly 6 values");
      for (int i = 0; i < 6; ++i) cfg.seeding.budget_edges[i] = v[static_cast<std::size_t>(i)];
    }
    else if (key == "agents.initial_stock") cfg.seeding.initial_stock = as_double(key, e);
    else if (key == "agents.pkg_min") cfg.seeding.pkg_min = as_double(key, e);
    else if (key == "agents.pkg_max") cfg.seeding.pkg_max = as_double(key, e);
    else if (key == "agents.pkg_level_step") cfg.seeding.pkg_level_step = as_double(key, e);
    else if (key == "env.gamma_r") cfg.gamma_r = as_double(key, e);
    else if (key == "env.gamma_e") cfg.enforce.gamma_e = as_double(key, e);
    else if (key == "env.window") cfg.enforce.window = static_cast<int>(as_int(key, e));
    else if (key == "env.t_e") cfg.enforce.t_e = static_cast<int>(as_int(key, e));
    else if (key == "env.risk_scale") cfg.risk_scale_override = as_double(key, e);
    else if (key == "env.risk_cut_lo") cfg.risk_cut_lo_override = as_double(key, e);
    else if (key == "env.risk_cut_hi") cfg.risk_cut_hi_override = as_double(key, e);
    else if (key == "regime.kind") {
      try {
        cfg.regime.kind = regime_kind_from_string(e.value);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError("config line " + std::to_string(e.line) + ": " + ex.what());
      }
    }
    else if (key == "regime.share") cfg.regime.share = as_double(key, e);
    else if (key == "regime.consent_prob") cfg.regime.consent_prob = as_double(key, e);
    else if (key == "regime.join_prob") cfg.regime.join_prob = as_double(key, e);
    else if (key == "regime.platform_fee") cfg.regime.platform_fee = as_double(key, e);
    else if (key == "plan.t") cfg.plan.horizon = static_cast<int>(as_int(key, e));
    else if (key == "plan.seeds") cfg.plan.n_seeds = static_cast<int>(as_int(key, e));
    else if (key == "plan.seed_base") cfg.plan.seed_base = static_cast<std::uint64_t>(as_int(key, e));
    else if (key == "plan.regimes") cfg.plan.regimes = split_list(e.value);
    else if (key == "plan.share_grid") cfg.plan.share_grid = as_double_list(key, e);
    else if (key == "plan.preset") cfg.plan.preset = e.value;
    else if (key == "plan.threads") cfg.plan.threads = static_cast<int>(as_int(key, e));
  }

  apply_preset(cfg);

  if (cfg.width < 1 || cfg.height < 1 || !(cfg.cell_radius_km > 0.0))
    throw ConfigError("grid: dimensions must be >= 1 and radius > 0");
  if (cfg.plan.horizon < 1) throw ConfigError("plan.t must be >= 1");
  if (cfg.plan.n_seeds < 1) throw ConfigError("plan.seeds must be >= 1");
  for (double s : cfg.plan.share_grid)
    if (s < 0.0 || s > 1.0) throw ConfigError("plan.share_grid values must lie in [0,1]");
  if (cfg.density_source == "csv" && cfg.density_csv.empty())
    throw ConfigError("density.source = csv requires density.csv_path");
  for (const auto& r : cfg.plan.regimes) {
    try {
      regime_kind_from_string(r);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("plan.regimes: ") + ex.what());
    }
  }
  if (static_cast<bool>(cfg.risk_cut_lo_override) != static_cast<bool>(cfg.risk_cut_hi_override))
    throw ConfigError("env.risk_cut_lo and env.risk_cut_hi must be set together");
  cfg.buyer.validate();
  cfg.seller.validate();
  cfg.seeding.validate();
  cfg.enforce.validate();
  cfg.regime.validate();
  if (!(cfg.gamma_r > 0.0)) throw ConfigError("env.gamma_r must be > 0");
  return cfg;
}

inline RunConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_text(ss.str(), overrides);
}

inline std::string config_reference() {
  std::ostringstream out;
  out << "# Configuration reference (key | default | meaning)\n";
  std::string section;
  for (const auto& k : cfgdetail::schema()) {
    std::string key = k.key;
    std::string sec = key.substr(0, key.rfind('.'));
    if (sec != section) {
      section = sec;
      out << "\n[" << section << "]\n";
    }
    out << "  " << key.substr(key.rfind('.') + 1) << " = " << k.def << "  # "
        << k.doc << '\n';
  }
  return out.str();
}

// Canonical echo of a parsed config; feeds meta.json and the content hash.
inline std::string config_echo(const RunConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "grid.width=" << c.width << "\ngrid.height=" << c.height
    << "\ngrid.cell_radius_km=" << c.cell_radius_km
    << "\ndensity.source=" << c.density_source
    << "\ndensity.csv_path=" << c.density_csv << '\n';
  for (const auto& h : c.buyer_hotspots)
    o << "density.buyer.hotspot=" << h.fx << ' ' << h.fy << ' ' << h.intensity
      << ' ' << h.decay << '\n';
  for (const auto& h : c.seller_hotspots)
    o << "density.seller.hotspot=" << h.fx << ' ' << h.fy << ' ' << h.intensity
      << ' ' << h.decay << '\n';
  o << "coefficients.buyer=" << c.buyer.rho << ',' << c.buyer.beta << ','
    << c.buyer.tau << ',' << c.buyer.gamma << ',' << c.buyer.phi << ','
    << c.buyer.mu_alpha << ',' << c.buyer.sigma_alpha << ',' << c.buyer.kappa
    << '\n';
  o << "coefficients.seller=" << c.seller.c0 << ',' << c.seller.c1 << ','
    << c.seller.c2 << ',' << c.seller.beta_r << ',' << c.seller.beta_e << ','
    << c.seller.delta << ',' << c.seller.mu_alpha << ','
    << c.seller.sigma_alpha << '\n';
  o << "agents.budget_edges=";
  for (int i = 0; i < 6; ++i) o << (i ? "," : "") << c.seeding.budget_edges[i];
  o << "\nagents.initial_stock=" << c.seeding.initial_stock
    << "\nagents.pkg_min=" << c.seeding.pkg_min
    << "\nagents.pkg_max=" << c.seeding.pkg_max
    << "\nagents.pkg_level_step=" << c.seeding.pkg_level_step
    << "\nenv.gamma_r=" << c.gamma_r << "\nenv.gamma_e=" << c.enforce.gamma_e
    << "\nenv.window=" << c.enforce.window << "\nenv.t_e=" << c.enforce.t_e
    << '\n';
  if (c.risk_scale_override) o << "env.risk_scale=" << *c.risk_scale_override << '\n';
  if (c.risk_cut_lo_override) o << "env.risk_cut_lo=" << *c.risk_cut_lo_override << '\n';
  if (c.risk_cut_hi_override) o << "env.risk_cut_hi=" << *c.risk_cut_hi_override << '\n';
  o << "regime.kind=" << c.regime.label() << "\nregime.share=" << c.regime.share
    << "\nregime.consent_prob=" << c.regime.consent_prob
    << "\nregime.join_prob=" << c.regime.join_prob
    << "\nregime.platform_fee=" << c.regime.platform_fee
    << "\nplan.t=" << c.plan.horizon << "\nplan.seeds=" << c.plan.n_seeds
    << "\nplan.seed_base=" << c.plan.seed_base << "\nplan.regimes=";
  for (std::size_t i = 0; i < c.plan.regimes.size(); ++i)
    o << (i ? "," : "") << c.plan.regimes[i];
  o << "\nplan.share_grid=";
  for (std::size_t i = 0; i < c.plan.share_grid.size(); ++i)
    o << (i ? "," : "") << c.plan.share_grid[i];
  o << "\nplan.preset=" << c.plan.preset << '\n';
  return o.str();
}

}  // namespace datamkt

#endif  // DATAMARKET_CONFIG_HPP_
