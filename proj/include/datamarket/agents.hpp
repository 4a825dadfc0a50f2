#ifndef DATAMARKET_AGENTS_HPP_
#define DATAMARKET_AGENTS_HPP_

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "datamarket/calibration.hpp"
#include "datamarket/csv.hpp"
#include "datamarket/hexgrid.hpp"
#include "datamarket/rng.hpp"

namespace datamkt {

struct Buyer {
  int id = 0;
  int cell_id = 0;
  int z = 1;              // capability tier 1..5
  double x_stock = 0.0;   // data already held (volume units)
  double m0 = 0.0;        // initial budget
  double spent = 0.0;     // cumulative spending; budget() = m0 - spent
  double alpha = 1.0;     // price coefficient, > 0

  double budget() const { return m0 - spent; }
};

struct Seller {
  int id = 0;
  int cell_id = 0;
  int s = 1;              // institutional tier 1..5
  double x_pkg = 1.0;     // offered package volume (nonrival, fixed)
  int r_class = 1;        // risk R in {1,2,3}, assigned once at entry
  int e_state = 1;        // enforcement E in {1,2,3}, evolves
  double alpha = 1.0;
  double last_price = 0.0;  // ratchet floor; 0 before first sale
  bool consent = false;     // IC regime access flag
  bool on_exchange = false; // PME regime membership flag
};

struct Hotspot {
  int cell_id = 0;
  double intensity = 1.0;  // > 0
  double decay = 0.1;      // per km, > 0
};

// Exponential-kernel density field standing in for real registration/POI
// counts: density(c) = sum_h intensity_h * exp(-decay_h * dist(c, h)).
inline std::vector<double> synth_density(const Grid& grid,
                                         const std::vector<Hotspot>& hotspots) {
  for (const auto& h : hotspots) {
    grid.check_id(h.cell_id);
    if (!(h.intensity > 0.0) || !(h.decay > 0.0))
      throw std::invalid_argument("synth_density: intensity and decay must be > 0");
  }
  std::vector<double> density(static_cast<std::size_t>(grid.n_cells()), 0.0);
  for (int c = 0; c < grid.n_cells(); ++c) {
    double d = 0.0;
    for (const auto& h : hotspots)
      d += h.intensity * std::exp(-h.decay * grid.distance_km(c, h.cell_id));
    density[static_cast<std::size_t>(c)] = d;
  }
  return density;
}

struct SeedParams {
  // Budget band edges for buyer levels 1..5: band L = [edges[L-1], edges[L]).
  // Endpoints follow the reported magnitudes (level 1 around 1e4, level 5
  // around 1e7); the middle two decades are split into three equal
  // log-width bands to keep the bands disjoint and ascending.
  double budget_edges[6] = {1e4, 1e5, 4.641588833612779e5,
                            2.1544346900318843e6, 1e7, 1e8};
  double initial_stock = 0.0;
  double pkg_min = 2.5;       // seller package volume, log-uniform base range
  double pkg_max = 26.0;
  double pkg_level_step = 0.1;   // range scales by 1 + step*(level-1)

  void validate() const {
    for (int i = 0; i < 5; ++i)
      if (!(budget_edges[i] < budget_edges[i + 1]))
        throw std::invalid_argument("SeedParams: budget edges must ascend");
    if (!(budget_edges[0] > 0.0) || !(pkg_min > 0.0) || !(pkg_max > pkg_min) ||
        initial_stock < 0.0 || pkg_level_step < 0.0)
      throw std::invalid_argument("SeedParams: invalid values");
  }
};

struct Population {
  std::vector<Buyer> buyers;
  std::vector<Seller> sellers;
};

// A cell of tier k hosts one agent per level 1..k on each side (tier 0
// hosts none). Draw order is fixed (cells ascending, buyers before
// sellers) so a given init stream always yields the same population.
inline Population seed_agents(const Grid& grid, const BuyerCoeffs& bc,
                              const SellerCoeffs& sc, const SeedParams& sp,
                              Pcg32& rng) {
  bc.validate();
  sc.validate();
  sp.validate();
  bool any_tier = false;
  for (const Cell& c : grid.cells)
    if (c.buyer_tier > 0 || c.seller_tier > 0) any_tier = true;
  if (!any_tier && grid.n_cells() > 1)
    throw std::logic_error("seed_agents: grid has no tiers assigned");

  Population pop;
  for (const Cell& c : grid.cells) {
    for (int level = 1; level <= c.buyer_tier; ++level) {
      Buyer b;
      b.id = static_cast<int>(pop.buyers.size());
      b.cell_id = c.id;
      b.z = level;
      b.m0 = rng.log_uniform(sp.budget_edges[level - 1], sp.budget_edges[level]);
      b.x_stock = sp.initial_stock;
      b.alpha = sample_alpha(bc.mu_alpha, bc.sigma_alpha, rng);
      pop.buyers.push_back(b);
    }
  }
  for (const Cell& c : grid.cells) {
    for (int level = 1; level <= c.seller_tier; ++level) {
      Seller s;
      s.id = static_cast<int>(pop.sellers.size());
      s.cell_id = c.id;
      s.s = level;
      double scale = 1.0 + sp.pkg_level_step * (level - 1);
      s.x_pkg = rng.log_uniform(sp.pkg_min * scale, sp.pkg_max * scale);
      s.alpha = sample_alpha(sc.mu_alpha, sc.sigma_alpha, rng);
      pop.sellers.push_back(s);
    }
  }
  return pop;
}

inline void write_agents_csv(const std::string& path, const Population& pop) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "kind,id,cell_id,level,alpha,budget_or_pkg,x_stock\n";
  for (const Buyer& b : pop.buyers)
    out << "buyer," << b.id << ',' << b.cell_id << ',' << b.z << ','
        << csv::fmt(b.alpha) << ',' << csv::fmt(b.m0) << ','
        << csv::fmt(b.x_stock) << '\n';
  for (const Seller& s : pop.sellers)
    out << "seller," << s.id << ',' << s.cell_id << ',' << s.s << ','
        << csv::fmt(s.alpha) << ',' << csv::fmt(s.x_pkg) << ",0\n";
}

}  // namespace datamkt

#endif  // DATAMARKET_AGENTS_HPP_
