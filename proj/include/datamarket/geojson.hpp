#ifndef DATAMARKET_GEOJSON_HPP_
#define DATAMARKET_GEOJSON_HPP_

#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "datamarket/csv.hpp"
#include "datamarket/hexgrid.hpp"

// Trade-arc export: one LineString per deal from the buyer's cell centroid
// to the seller's. Coordinates are the grid's planar km frame, declared in
// a top-level property rather than dressed up as lon/lat.

namespace datamkt {

inline nlohmann::json trade_arcs_geojson(const Grid& grid,
                                         const csv::Table& trades,
                                         int t_min = 0,
                                         int t_max = std::numeric_limits<int>::max()) {
  int c_t = trades.require_column("t");
  int c_cb = trades.require_column("cell_b");
  int c_cs = trades.require_column("cell_s");
  int c_price = trades.require_column("price");
  int c_vol = trades.require_column("volume");
  int c_ex = trades.require_column("on_exchange");
  int c_regime = trades.require_column("regime");

  nlohmann::json features = nlohmann::json::array();
  for (const auto& row : trades.rows) {
    int t = static_cast<int>(csv::to_long(row[static_cast<std::size_t>(c_t)]));
    if (t < t_min || t > t_max) continue;
    int cb = static_cast<int>(csv::to_long(row[static_cast<std::size_t>(c_cb)]));
    int cs = static_cast<int>(csv::to_long(row[static_cast<std::size_t>(c_cs)]));
    grid.check_id(cb);
    grid.check_id(cs);
    const Cell& a = grid.cells[static_cast<std::size_t>(cb)];
    const Cell& b = grid.cells[static_cast<std::size_t>(cs)];
    nlohmann::json f;
    f["type"] = "Feature";
    f["geometry"] = {
        {"type", "LineString"},
        {"coordinates", {{a.x_km, a.y_km}, {b.x_km, b.y_km}}},
    };
    f["properties"] = {
        {"t", t},
        {"volume", csv::to_double(row[static_cast<std::size_t>(c_vol)])},
        {"price", csv::to_double(row[static_cast<std::size_t>(c_price)])},
        {"regime", row[static_cast<std::size_t>(c_regime)]},
        {"on_exchange",
         csv::to_long(row[static_cast<std::size_t>(c_ex)]) != 0},
    };
    features.push_back(std::move(f));
  }
  nlohmann::json out;
  out["type"] = "FeatureCollection";
  out["coordinate_system"] = "planar_km";
  out["features"] = std::move(features);
  return out;
}

inline void export_trade_arcs(const Grid& grid, const std::string& trades_csv,
                              const std::string& out_path, int t_min,
                              int t_max) {
  auto table = csv::read_file(trades_csv);
  auto gj = trade_arcs_geojson(grid, table, t_min, t_max);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << gj.dump(2) << '\n';
}

}  // namespace datamkt

#endif  // DATAMARKET_GEOJSON_HPP_
