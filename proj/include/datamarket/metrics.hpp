#ifndef DATAMARKET_METRICS_HPP_
#define DATAMARKET_METRICS_HPP_

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "datamarket/csv.hpp"
#include "datamarket/market.hpp"

namespace datamkt {

// One per-period panel observation. Welfare is the Kaldor-Hicks aggregate
// CS + PS - Ext, computed from the same sums it is reported with.
struct KpiRow {
  std::uint64_t seed = 0;
  std::string regime;
  double share = 0.0;
  int t = 0;
  int trades = 0;
  double volume = 0.0;
  double buyer_surplus = 0.0;
  double seller_surplus = 0.0;
  double externality = 0.0;
  double total_welfare = 0.0;
};

template <typename It>
inline KpiRow collect(It first, It last, std::uint64_t seed,
                      const std::string& regime, double share, int t) {
  KpiRow row;
  row.seed = seed;
  row.regime = regime;
  row.share = share;
  row.t = t;
  for (It it = first; it != last; ++it) {
    if (it->period != t)
      throw std::invalid_argument("collect: record from wrong period");
    row.trades += 1;
    row.volume += it->volume;
    row.buyer_surplus += it->buyer_surplus;
    row.seller_surplus += it->seller_surplus;
    row.externality += it->externality;
  }
  row.total_welfare = row.buyer_surplus + row.seller_surplus - row.externality;
  return row;
}

inline const char* kPanelHeader =
    "seed,regime,share,t,trades,volume,buyer_surplus,seller_surplus,"
    "externality,total_welfare";

inline void write_panel_row(std::ostream& out, const KpiRow& r) {
  out << r.seed << ',' << r.regime << ',' << csv::fmt(r.share) << ',' << r.t
      << ',' << r.trades << ',' << csv::fmt(r.volume) << ','
      << csv::fmt(r.buyer_surplus) << ',' << csv::fmt(r.seller_surplus) << ','
      << csv::fmt(r.externality) << ',' << csv::fmt(r.total_welfare) << '\n';
}

inline void write_panel_csv(const std::string& path,
                            const std::vector<KpiRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kPanelHeader << '\n';
  for (const auto& r : rows) write_panel_row(out, r);
}

inline const char* kTradeHeader =
    "t,buyer_id,seller_id,cell_b,cell_s,price,volume,wtp,wta,buyer_surplus,"
    "seller_surplus,externality,on_exchange,regime,seed";

inline void write_trades_csv(const std::string& path,
                             const std::vector<TradeRecord>& log,
                             const std::string& regime, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kTradeHeader << '\n';
  for (const auto& r : log) {
    out << r.period << ',' << r.buyer_id << ',' << r.seller_id << ','
        << r.cell_b << ',' << r.cell_s << ',' << csv::fmt(r.price) << ','
        << csv::fmt(r.volume) << ',' << csv::fmt(r.wtp) << ','
        << csv::fmt(r.wta) << ',' << csv::fmt(r.buyer_surplus) << ','
        << csv::fmt(r.seller_surplus) << ',' << csv::fmt(r.externality) << ','
        << (r.on_exchange ? 1 : 0) << ',' << regime << ',' << seed << '\n';
  }
}

}  // namespace datamkt

#endif  // DATAMARKET_METRICS_HPP_
