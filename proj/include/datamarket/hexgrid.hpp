#ifndef DATAMARKET_HEXGRID_HPP_
#define DATAMARKET_HEXGRID_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "datamarket/csv.hpp"

// Hexagonal sandbox: flat-top hexes on an axial parallelogram lattice.
// "Radius" is the circumradius, so adjacent centroids sit sqrt(3)*R apart.
// Orientation is a pure convention; no computed quantity depends on it.

namespace datamkt {

struct Cell {
  int id = 0;
  int q = 0;  // axial column
  int r = 0;  // axial row
  double x_km = 0.0;
  double y_km = 0.0;
  int buyer_tier = 0;   // 0..5
  int seller_tier = 0;  // 0..5
};

class Grid {
 public:
  std::vector<Cell> cells;
  double cell_radius_km = 0.0;
  int width = 0;
  int height = 0;

  int n_cells() const { return static_cast<int>(cells.size()); }

  const std::vector<int>& neighbors(int id) const {
    check_id(id);
    return neighbors_[static_cast<std::size_t>(id)];
  }

  double distance_km(int a, int b) const {
    check_id(a);
    check_id(b);
    double dx = cells[a].x_km - cells[b].x_km;
    double dy = cells[a].y_km - cells[b].y_km;
    return std::sqrt(dx * dx + dy * dy);
  }

  void check_id(int id) const {
    if (id < 0 || id >= n_cells())
      throw std::out_of_range("hexgrid: unknown cell id " +
                              std::to_string(id));
  }

  friend Grid build_grid(int, int, double);

 private:
  std::vector<std::vector<int>> neighbors_;
};

inline Grid build_grid(int width_cells, int height_cells,
                       double cell_radius_km) {
  if (width_cells < 1 || height_cells < 1 || !(cell_radius_km > 0.0))
    throw std::invalid_argument("build_grid: dimensions must be >= 1 and radius > 0");
  Grid g;
  g.width = width_cells;
  g.height = height_cells;
  g.cell_radius_km = cell_radius_km;
  g.cells.reserve(static_cast<std::size_t>(width_cells) * height_cells);
  const double root3 = std::sqrt(3.0);
  for (int r = 0; r < height_cells; ++r) {
    for (int q = 0; q < width_cells; ++q) {
      Cell c;
      c.id = r * width_cells + q;
      c.q = q;
      c.r = r;
      // flat-top axial -> planar km
      c.x_km = cell_radius_km * 1.5 * q;
      c.y_km = cell_radius_km * root3 * (r + 0.5 * q);
      g.cells.push_back(c);
    }
  }
  static constexpr int kOffsets[6][2] = {{+1, 0}, {-1, 0}, {0, +1},
                                         {0, -1}, {+1, -1}, {-1, +1}};
  g.neighbors_.resize(g.cells.size());
  for (const Cell& c : g.cells) {
    auto& nb = g.neighbors_[static_cast<std::size_t>(c.id)];
    for (const auto& off : kOffsets) {
      int nq = c.q + off[0];
      int nr = c.r + off[1];
      if (nq < 0 || nq >= width_cells || nr < 0 || nr >= height_cells)
        continue;
      nb.push_back(nr * width_cells + nq);
    }
    std::sort(nb.begin(), nb.end());
  }
  return g;
}

inline double distance_km(const Grid& g, int a, int b) {
  return g.distance_km(a, b);
}

// ---------------------------------------------------------------------------
// Jenks natural breaks: exact dynamic program (Fisher's optimal partition)
// minimizing total within-class sum of squared deviations. Runs on the
// distinct values with multiplicity weights so tied observations can never
// straddle a class boundary.

namespace detail {

struct WeightedValues {
  std::vector<double> v;  // ascending distinct values
  std::vector<double> w;  // multiplicities
};

inline WeightedValues collapse_sorted(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  WeightedValues out;
  for (double x : values) {
    if (!out.v.empty() && x == out.v.back()) {
      out.w.back() += 1.0;
    } else {
      out.v.push_back(x);
      out.w.push_back(1.0);
    }
  }
  return out;
}

}  // namespace detail

// Returns the k-1 ascending break values (upper class boundaries of the
// first k-1 classes). With fewer than k distinct values the class count
// collapses to the number of distinct values and fewer breaks come back.
inline std::vector<double> jenks_breaks(const std::vector<double>& values,
                                        int k) {
  if (values.empty())
    throw std::invalid_argument("jenks_breaks: empty input");
  if (k < 1) throw std::invalid_argument("jenks_breaks: k must be >= 1");
  auto wv = detail::collapse_sorted(values);
  int n = static_cast<int>(wv.v.size());
  int kk = std::min(k, n);

  // prefix sums over weighted values
  std::vector<double> cw(n + 1, 0.0), cwx(n + 1, 0.0), cwx2(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    cw[i + 1] = cw[i] + wv.w[i];
    cwx[i + 1] = cwx[i] + wv.w[i] * wv.v[i];
    cwx2[i + 1] = cwx2[i] + wv.w[i] * wv.v[i] * wv.v[i];
  }
  auto sse = [&](int i, int j) {  // class covering distinct indices [i, j]
    double w = cw[j + 1] - cw[i];
    double sx = cwx[j + 1] - cwx[i];
    double sx2 = cwx2[j + 1] - cwx2[i];
    double e = sx2 - sx * sx / w;
    return e > 0.0 ? e : 0.0;
  };

  const double inf = std::numeric_limits<double>::infinity();
  // dp[c][j]: best total SSE splitting [0..j] into c+1 classes
  std::vector<std::vector<double>> dp(kk, std::vector<double>(n, inf));
  std::vector<std::vector<int>> cut(kk, std::vector<int>(n, 0));
  for (int j = 0; j < n; ++j) dp[0][j] = sse(0, j);
  for (int c = 1; c < kk; ++c) {
    for (int j = c; j < n; ++j) {
      for (int i = c; i <= j; ++i) {  // class c starts at distinct index i
        double cand = dp[c - 1][i - 1] + sse(i, j);
        if (cand < dp[c][j]) {
          dp[c][j] = cand;
          cut[c][j] = i;
        }
      }
    }
  }

  std::vector<double> breaks;
  int j = n - 1;
  for (int c = kk - 1; c >= 1; --c) {
    int i = cut[c][j];
    breaks.push_back(wv.v[i - 1]);  // upper bound of the class below
    j = i - 1;
  }
  std::reverse(breaks.begin(), breaks.end());
  return breaks;
}

// Class of `x` under ascending break values: 0..breaks.size().
inline int jenks_class(const std::vector<double>& breaks, double x) {
  int c = 0;
  for (double b : breaks) {
    if (x <= b) return c;
    ++c;
  }
  return c;
}

// Total within-class SSE induced by a break set; used by tests against the
// exhaustive oracle.
inline double jenks_total_sse(const std::vector<double>& values,
                              const std::vector<double>& breaks) {
  int k = static_cast<int>(breaks.size()) + 1;
  std::vector<double> sum(k, 0.0), sum2(k, 0.0), cnt(k, 0.0);
  for (double x : values) {
    int c = jenks_class(breaks, x);
    sum[c] += x;
    sum2[c] += x * x;
    cnt[c] += 1.0;
  }
  double total = 0.0;
  for (int c = 0; c < k; ++c)
    if (cnt[c] > 0.0) total += sum2[c] - sum[c] * sum[c] / cnt[c];
  return total;
}

// ---------------------------------------------------------------------------
// Tier assignment. Six-tier scheme: zero-density cells are tier 0; the
// positive support is partitioned by Jenks into at most five classes mapping
// to tiers 1..5 in ascending break order.

inline void assign_tiers_one_side(Grid& grid, const std::vector<double>& density,
                                  bool buyer_side) {
  if (static_cast<int>(density.size()) != grid.n_cells())
    throw std::invalid_argument("assign_tiers: density length != cell count");
  std::vector<double> positive;
  for (double d : density) {
    if (d < 0.0)
      throw std::invalid_argument("assign_tiers: negative density");
    if (d > 0.0) positive.push_back(d);
  }
  std::vector<double> breaks;
  if (!positive.empty()) breaks = jenks_breaks(positive, 5);
  for (Cell& c : grid.cells) {
    double d = density[static_cast<std::size_t>(c.id)];
    int tier = (d == 0.0) ? 0 : 1 + jenks_class(breaks, d);
    (buyer_side ? c.buyer_tier : c.seller_tier) = tier;
  }
}

inline void assign_tiers(Grid& grid, const std::vector<double>& buyer_density,
                         const std::vector<double>& seller_density) {
  assign_tiers_one_side(grid, buyer_density, true);
  assign_tiers_one_side(grid, seller_density, false);
}

// Per-cell density ingestion: `cell_id,buyer_density,seller_density`,
// one row per cell.
struct DensityPair {
  std::vector<double> buyer;
  std::vector<double> seller;
};

inline DensityPair load_density_csv(const std::string& path, int n_cells) {
  auto t = csv::read_file(path);
  int cid = t.require_column("cell_id");
  int cb = t.require_column("buyer_density");
  int cs = t.require_column("seller_density");
  if (static_cast<int>(t.rows.size()) != n_cells)
    throw std::runtime_error("density csv: expected " +
                             std::to_string(n_cells) + " rows, got " +
                             std::to_string(t.rows.size()));
  DensityPair d;
  d.buyer.assign(static_cast<std::size_t>(n_cells), 0.0);
  d.seller.assign(static_cast<std::size_t>(n_cells), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(n_cells), 0);
  for (const auto& row : t.rows) {
    long id = csv::to_long(row[static_cast<std::size_t>(cid)]);
    if (id < 0 || id >= n_cells || seen[static_cast<std::size_t>(id)])
      throw std::runtime_error("density csv: bad or duplicate cell_id " +
                               std::to_string(id));
    seen[static_cast<std::size_t>(id)] = 1;
    d.buyer[static_cast<std::size_t>(id)] =
        csv::to_double(row[static_cast<std::size_t>(cb)]);
    d.seller[static_cast<std::size_t>(id)] =
        csv::to_double(row[static_cast<std::size_t>(cs)]);
  }
  return d;
}

}  // namespace datamkt

#endif  // DATAMARKET_HEXGRID_HPP_
