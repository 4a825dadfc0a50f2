#ifndef DATAMARKET_ENVIRONMENT_HPP_
#define DATAMARKET_ENVIRONMENT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "datamarket/agents.hpp"
#include "datamarket/hexgrid.hpp"
#include "datamarket/rng.hpp"

// Volume-indexed risk classes and activity-indexed enforcement intensity,
// both through an ordered logit over a concave score z = ln(1 + x/scale).
// Scales and cut points are calibrated from the data rather than fixed.

namespace datamkt {

// Linear interpolation between order statistics (the R/numpy default,
// h = (n-1)p). Input must be sorted ascending.
inline double percentile_linear(const std::vector<double>& sorted, double p) {
  if (sorted.empty())
    throw std::invalid_argument("percentile_linear: empty input");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double z_transform(double x, double scale) {
  if (x < 0.0 || !(scale > 0.0))
    throw std::invalid_argument("z_transform: need x >= 0 and scale > 0");
  return std::log1p(x / scale);
}

inline double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// (P1, P2, P3) with P3 = sigma(gamma(z-c2)), P2 = sigma(gamma(z-c1)) - P3.
inline std::array<double, 3> ordered_logit_probs(double z, double gamma,
                                                 double c1, double c2) {
  if (!(c1 < c2))
    throw std::invalid_argument("ordered_logit_probs: cuts must ascend");
  if (!(gamma > 0.0))
    throw std::invalid_argument("ordered_logit_probs: gamma must be > 0");
  double s1 = sigmoid(gamma * (z - c1));
  double s2 = sigmoid(gamma * (z - c2));
  return {1.0 - s1, s1 - s2, s2};
}

inline int draw_ordered(const std::array<double, 3>& p, Pcg32& rng) {
  double u = rng.uniform01();
  if (u < p[0]) return 1;
  if (u < p[0] + p[1]) return 2;
  return 3;
}

// All-equal score distributions would degenerate the percentile cuts; widen
// by epsilon so the three classes stay defined.
inline std::pair<double, double> percentile_cuts_thirds(std::vector<double> z) {
  if (z.empty())
    throw std::invalid_argument("percentile_cuts_thirds: empty input");
  std::sort(z.begin(), z.end());
  double lo = percentile_linear(z, 1.0 / 3.0);
  double hi = percentile_linear(z, 2.0 / 3.0);
  if (!(lo < hi)) {
    constexpr double eps = 1e-6;
    lo -= eps;
    hi += eps;
  }
  return {lo, hi};
}

struct RiskParams {
  double gamma_r = 1.0;
  double scale_r = 1.0;
  double cut_lo = 0.0;
  double cut_hi = 1.0;
};

// scale = median positive package volume; cuts = thirds of z across all
// sellers, so an uninformative market lands near a 1/3 class mix.
inline RiskParams calibrate_risk(const std::vector<Seller>& sellers,
                                 double gamma_r) {
  if (!(gamma_r > 0.0))
    throw std::invalid_argument("calibrate_risk: gamma_r must be > 0");
  std::vector<double> positive;
  for (const Seller& s : sellers)
    if (s.x_pkg > 0.0) positive.push_back(s.x_pkg);
  if (positive.empty())
    throw std::runtime_error("calibrate_risk: no sellers with positive volume");
  std::sort(positive.begin(), positive.end());
  RiskParams p;
  p.gamma_r = gamma_r;
  p.scale_r = percentile_linear(positive, 0.5);
  std::vector<double> z;
  z.reserve(sellers.size());
  for (const Seller& s : sellers) z.push_back(z_transform(s.x_pkg, p.scale_r));
  auto cuts = percentile_cuts_thirds(std::move(z));
  p.cut_lo = cuts.first;
  p.cut_hi = cuts.second;
  return p;
}

inline std::array<double, 3> risk_probs(const RiskParams& p, double x_pkg) {
  return ordered_logit_probs(z_transform(x_pkg, p.scale_r), p.gamma_r, p.cut_lo,
                             p.cut_hi);
}

inline int assign_risk(const Seller& s, const RiskParams& p, Pcg32& rng) {
  return draw_ordered(risk_probs(p, s.x_pkg), rng);
}

struct EnforceParams {
  double gamma_e = 1.0;
  int window = 1;  // periods of history feeding the neighborhood total
  int t_e = 1;     // update every t_e periods
  void validate() const {
    if (!(gamma_e > 0.0) || window < 1 || t_e < 1)
      throw std::invalid_argument("EnforceParams: invalid values");
  }
};

struct EnforceState {
  bool scale_set = false;
  double scale_e = 0.0;  // frozen at the first update with activity
  bool cuts_set = false;
  double cut_lo = 0.0;
  double cut_hi = 0.0;
};

// Per-cell traded volume summed over periods [t - window, t).
// `period_cell_volume[p]` holds the per-cell totals of period p.
inline std::vector<double> windowed_cell_volume(
    const Grid& grid, const std::vector<std::vector<double>>& period_cell_volume,
    int t, int window) {
  std::vector<double> total(static_cast<std::size_t>(grid.n_cells()), 0.0);
  int lo = std::max(0, t - window);
  for (int p = lo; p < t && p < static_cast<int>(period_cell_volume.size());
       ++p) {
    const auto& cv = period_cell_volume[static_cast<std::size_t>(p)];
    for (int c = 0; c < grid.n_cells(); ++c)
      total[static_cast<std::size_t>(c)] += cv[static_cast<std::size_t>(c)];
  }
  return total;
}

// Re-classifies every seller's enforcement state from the windowed total of
// traded volume in its own and adjacent cells. Zero activity pins E = 1 (no
// draw is consumed). Cut points track the current activity distribution;
// the scale freezes at the first update that sees activity.
inline void enforcement_step(const Grid& grid, std::vector<Seller>& sellers,
                             const std::vector<std::vector<double>>& period_cell_volume,
                             int t, const EnforceParams& params,
                             EnforceState& state, Pcg32& rng) {
  params.validate();
  if (t < 1 || t % params.t_e != 0) return;

  auto cell_total = windowed_cell_volume(grid, period_cell_volume, t, params.window);
  std::vector<double> seller_total(sellers.size(), 0.0);
  for (std::size_t i = 0; i < sellers.size(); ++i) {
    double tot = cell_total[static_cast<std::size_t>(sellers[i].cell_id)];
    for (int nb : grid.neighbors(sellers[i].cell_id))
      tot += cell_total[static_cast<std::size_t>(nb)];
    seller_total[i] = tot;
  }

  std::vector<double> positive;
  for (double v : seller_total)
    if (v > 0.0) positive.push_back(v);

  if (!positive.empty() && !state.scale_set) {
    std::sort(positive.begin(), positive.end());
    state.scale_e = percentile_linear(positive, 0.5);
    state.scale_set = true;
  }

  if (state.scale_set) {
    std::vector<double> zs;
    for (double v : seller_total)
      if (v > 0.0) zs.push_back(z_transform(v, state.scale_e));
    if (!zs.empty()) {
      auto cuts = percentile_cuts_thirds(std::move(zs));
      state.cut_lo = cuts.first;
      state.cut_hi = cuts.second;
      state.cuts_set = true;
    }
  }

  for (std::size_t i = 0; i < sellers.size(); ++i) {
    if (seller_total[i] <= 0.0 || !state.cuts_set) {
      sellers[i].e_state = 1;
      continue;
    }
    double z = z_transform(seller_total[i], state.scale_e);
    auto probs =
        ordered_logit_probs(z, params.gamma_e, state.cut_lo, state.cut_hi);
    sellers[i].e_state = draw_ordered(probs, rng);
  }
}

}  // namespace datamkt

#endif  // DATAMARKET_ENVIRONMENT_HPP_
