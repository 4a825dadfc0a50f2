#ifndef DATAMARKET_MARKET_HPP_
#define DATAMARKET_MARKET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "datamarket/agents.hpp"
#include "datamarket/calibration.hpp"
#include "datamarket/environment.hpp"
#include "datamarket/hexgrid.hpp"
#include "datamarket/regimes.hpp"
#include "datamarket/rng.hpp"

// Per-period offer / accept / bargain / settle protocol. Each buyer makes at
// most one offer (to its max-WTP accessible, unconnected seller), each seller
// accepts at most one offer (the max-WTP one), and a deal executes only when
// WTP > WTA and the bargained price fits the buyer's remaining budget.

namespace datamkt {

struct TradeRecord {
  int period = 0;
  int buyer_id = 0;
  int seller_id = 0;
  int cell_b = 0;
  int cell_s = 0;
  double price = 0.0;
  double volume = 0.0;
  double wtp = 0.0;
  double wta = 0.0;
  double buyer_surplus = 0.0;
  double seller_surplus = 0.0;
  double externality = 0.0;
  bool on_exchange = false;
};

// Pairs that have consummated a deal never trade again within a run.
class ConnectionSet {
 public:
  void reset(int n_buyers, int n_sellers) {
    n_sellers_ = n_sellers;
    words_per_buyer_ = static_cast<std::size_t>((n_sellers + 63) / 64);
    bits_.assign(static_cast<std::size_t>(n_buyers) * words_per_buyer_, 0u);
    count_ = 0;
  }
  bool contains(int b, int s) const {
    return (word(b, s) >> (static_cast<unsigned>(s) & 63u)) & 1u;
  }
  void insert(int b, int s) {
    std::uint64_t& w = word(b, s);
    std::uint64_t m = 1ULL << (static_cast<unsigned>(s) & 63u);
    if (!(w & m)) ++count_;
    w |= m;
  }
  std::size_t size() const { return count_; }

 private:
  std::uint64_t& word(int b, int s) {
    return bits_[static_cast<std::size_t>(b) * words_per_buyer_ +
                 (static_cast<std::size_t>(s) >> 6)];
  }
  const std::uint64_t& word(int b, int s) const {
    return bits_[static_cast<std::size_t>(b) * words_per_buyer_ +
                 (static_cast<std::size_t>(s) >> 6)];
  }
  int n_sellers_ = 0;
  std::size_t words_per_buyer_ = 0;
  std::vector<std::uint64_t> bits_;
  std::size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Valuation primitives

// WTP = [f(x_stock) b x_j + tau s + gamma z + phi s z - kappa ln(1+d)] / a_i,
// f(x) = exp(-rho x). May be negative at large distances.
inline double buyer_wtp(const Buyer& b, const Seller& s, const BuyerCoeffs& c,
                        double d_km) {
  if (!(b.alpha > 0.0)) throw std::invalid_argument("buyer_wtp: alpha <= 0");
  double numer = std::exp(-c.rho * b.x_stock) * c.beta * s.x_pkg +
                 c.tau * s.s + c.gamma * b.z + c.phi * (s.s * b.z) -
                 c.kappa * std::log1p(d_km);
  return numer / b.alpha;
}

inline double seller_cost(const Seller& s, const SellerCoeffs& c, int R,
                          int E) {
  return cost_terms(s, c, R, E).total();
}

inline double seller_wta(const Seller& s, const SellerCoeffs& c, int R,
                         int E) {
  if (!(s.alpha > 0.0)) throw std::invalid_argument("seller_wta: alpha <= 0");
  return seller_cost(s, c, R, E) / s.alpha;
}

inline double ratchet(const Seller& s, double fresh_wta) {
  return std::max(fresh_wta, s.last_price);
}

// Convex combination weighted by relative bargaining power
// lambda = s/(z+s): stronger sellers pull the price toward WTP.
inline double bargain_price(double wtp, double wta, int seller_tier,
                            int buyer_tier) {
  if (wtp < wta) throw std::logic_error("bargain_price: wtp < wta");
  double s = seller_tier;
  double z = buyer_tier;
  return (s * wtp + z * wta) / (z + s);
}

// Regime-adjusted WTP, computed term-by-term so the PME distance waiver is
// exact (the kappa term is omitted, not added back).
inline double adjusted_wtp(const RegimeConfig& rg, const Buyer& b,
                           const Seller& s, const BuyerCoeffs& bc,
                           const SellerCoeffs& sc, double d_km, int R, int E) {
  double numer = std::exp(-bc.rho * b.x_stock) * bc.beta * s.x_pkg +
                 bc.tau * s.s + bc.gamma * b.z + bc.phi * (s.s * b.z) -
                 buyer_liability_utility(rg, sc, R, E);
  if (!distance_free(rg, s)) numer -= bc.kappa * std::log1p(d_km);
  return numer / b.alpha;
}

// ---------------------------------------------------------------------------
// Pairwise distance cache (shared, grid-immutable)

class PairDistanceCache {
 public:
  static constexpr int kMaxCachedCells = 2500;

  explicit PairDistanceCache(const Grid& grid) : grid_(&grid) {
    n_ = grid.n_cells();
    if (n_ <= kMaxCachedCells) {
      log1p_km_.resize(static_cast<std::size_t>(n_) * n_);
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          log1p_km_[static_cast<std::size_t>(a) * n_ + b] =
              std::log1p(grid.distance_km(a, b));
    }
  }

  double log1p_distance(int a, int b) const {
    if (!log1p_km_.empty())
      return log1p_km_[static_cast<std::size_t>(a) * n_ + b];
    return std::log1p(grid_->distance_km(a, b));
  }

 private:
  const Grid* grid_;
  int n_ = 0;
  std::vector<double> log1p_km_;
};

// ---------------------------------------------------------------------------
// Simulation state for one (seed, regime) run

struct SimState {
  const Grid* grid = nullptr;
  const PairDistanceCache* dist = nullptr;
  BuyerCoeffs bc;
  SellerCoeffs sc;
  RegimeConfig regime;
  std::vector<Buyer> buyers;
  std::vector<Seller> sellers;
  ConnectionSet connections;
  RiskParams risk;
  EnforceParams enforce_params;
  EnforceState enforce_state;
  Pcg32 rng_shuffle;
  Pcg32 rng_enforce;
  std::vector<TradeRecord> trade_log;
  // per-period traded volume attributed to the seller's cell, indexed by t
  std::vector<std::vector<double>> period_cell_volume;

  void ensure_period(int t) {
    while (static_cast<int>(period_cell_volume.size()) <= t)
      period_cell_volume.emplace_back(
          static_cast<std::size_t>(grid->n_cells()), 0.0);
  }
};

// One interaction cycle. Enforcement has already been updated for period t.
// Returns the number of executed deals.
inline int market_step(SimState& st, int t) {
  const int nb = static_cast<int>(st.buyers.size());
  const int ns = static_cast<int>(st.sellers.size());
  st.ensure_period(t);

  // seller-side per-period terms
  std::vector<double> eff_wta(static_cast<std::size_t>(ns));
  std::vector<double> liab(static_cast<std::size_t>(ns));
  std::vector<char> access(static_cast<std::size_t>(ns));
  std::vector<char> no_dist(static_cast<std::size_t>(ns));
  for (int j = 0; j < ns; ++j) {
    const Seller& s = st.sellers[static_cast<std::size_t>(j)];
    eff_wta[j] = ratchet(s, adjust_wta(st.regime, s, st.sc, s.r_class, s.e_state));
    liab[j] = buyer_liability_utility(st.regime, st.sc, s.r_class, s.e_state);
    access[j] = access_filter(st.regime, s) ? 1 : 0;
    no_dist[j] = distance_free(st.regime, s) ? 1 : 0;
  }

  // buyer order: seeded shuffle (a fixed id order would privilege low ids)
  std::vector<int> order(static_cast<std::size_t>(nb));
  std::iota(order.begin(), order.end(), 0);
  st.rng_shuffle.shuffle(order);

  // offers: each buyer targets its argmax-WTP seller; ties -> lowest seller id
  std::vector<double> best_wtp(static_cast<std::size_t>(ns), 0.0);
  std::vector<int> best_buyer(static_cast<std::size_t>(ns), -1);
  for (int bi : order) {
    const Buyer& b = st.buyers[static_cast<std::size_t>(bi)];
    double fbb = std::exp(-st.bc.rho * b.x_stock) * st.bc.beta;
    double gz = st.bc.gamma * b.z;
    double phi_z = st.bc.phi * b.z;
    int target = -1;
    double target_wtp = 0.0;  // offers require WTP > 0
    for (int j = 0; j < ns; ++j) {
      if (!access[j]) continue;
      if (st.connections.contains(bi, j)) continue;
      const Seller& s = st.sellers[static_cast<std::size_t>(j)];
      double numer = fbb * s.x_pkg + st.bc.tau * s.s + gz + phi_z * s.s - liab[j];
      if (!no_dist[j])
        numer -= st.bc.kappa * st.dist->log1p_distance(b.cell_id, s.cell_id);
      double wtp = numer / b.alpha;
      if (wtp > target_wtp) {
        target_wtp = wtp;
        target = j;
      }
    }
    if (target < 0) continue;
    double w = target_wtp;
    if (w > best_wtp[target] ||
        (w == best_wtp[target] && (best_buyer[target] < 0 || bi < best_buyer[target]))) {
      best_wtp[target] = w;
      best_buyer[target] = bi;
    }
  }

  // settle in seller-id order; failed negotiations are silent non-events
  int executed = 0;
  for (int j = 0; j < ns; ++j) {
    int bi = best_buyer[static_cast<std::size_t>(j)];
    if (bi < 0) continue;
    Seller& s = st.sellers[static_cast<std::size_t>(j)];
    Buyer& b = st.buyers[static_cast<std::size_t>(bi)];
    double wtp = best_wtp[static_cast<std::size_t>(j)];
    double wta = eff_wta[static_cast<std::size_t>(j)];
    if (!(wtp > wta)) continue;
    double p = bargain_price(wtp, wta, s.s, b.z);
    if (p > b.budget()) continue;

    TradeRecord rec;
    rec.period = t;
    rec.buyer_id = bi;
    rec.seller_id = j;
    rec.cell_b = b.cell_id;
    rec.cell_s = s.cell_id;
    rec.price = p;
    rec.volume = s.x_pkg;
    rec.wtp = wtp;
    rec.wta = wta;
    rec.buyer_surplus = wtp - p;
    rec.seller_surplus = p - wta;
    rec.externality =
        externality_of_trade(st.regime, s, st.sc, s.r_class, s.e_state);
    rec.on_exchange = s.on_exchange;
    st.trade_log.push_back(rec);

    b.spent += p;
    b.x_stock += s.x_pkg;
    s.last_price = p;
    st.connections.insert(bi, j);
    st.period_cell_volume[static_cast<std::size_t>(t)]
                         [static_cast<std::size_t>(s.cell_id)] += s.x_pkg;
    ++executed;
  }
  return executed;
}

}  // namespace datamkt

#endif  // DATAMARKET_MARKET_HPP_
