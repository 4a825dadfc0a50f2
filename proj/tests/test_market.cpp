#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "datamarket/market.hpp"
#include "datamarket/rng.hpp"

using namespace datamkt;

namespace {

Buyer mk_buyer(int id, int cell, int z, double budget, double alpha) {
  Buyer b;
  b.id = id;
  b.cell_id = cell;
  b.z = z;
  b.m0 = budget;
  b.alpha = alpha;
  return b;
}

Seller mk_seller(int id, int cell, int s, double x, double alpha) {
  Seller sl;
  sl.id = id;
  sl.cell_id = cell;
  sl.s = s;
  sl.x_pkg = x;
  sl.alpha = alpha;
  return sl;
}

// Bare-bones state on a shared grid with neutral coefficients; tests tweak
// the pieces they exercise.
struct Fixture {
  Grid grid = build_grid(4, 4, 20.0);
  PairDistanceCache dist{grid};
  SimState st;

  Fixture() {
    st.grid = &grid;
    st.dist = &dist;
    st.bc = BuyerCoeffs{};
    st.sc = SellerCoeffs{};
    st.rng_shuffle = substream(1, stream::kShuffle);
    st.rng_enforce = substream(1, stream::kEnforce);
  }
  void finalize() {
    st.connections.reset(static_cast<int>(st.buyers.size()),
                         static_cast<int>(st.sellers.size()));
  }
};

// coefficients that make WTP equal beta*x_pkg for alpha=1 buyers
BuyerCoeffs plain_buyer_coeffs() {
  BuyerCoeffs bc;
  bc.rho = 0.0;
  bc.beta = 1.0;
  bc.tau = 0.0;
  bc.kappa = 0.0;
  bc.sigma_alpha = 0.0;
  return bc;
}

SellerCoeffs plain_seller_coeffs(double c0) {
  SellerCoeffs sc;
  sc.c0 = c0;
  sc.c1 = 0.0;
  sc.c2 = 0.0;
  sc.beta_r = 0.0;
  sc.beta_e = 0.0;
  sc.delta = 0.0;
  sc.sigma_alpha = 0.0;
  return sc;
}

}  // namespace

TEST_CASE("buyer_wtp worked examples (Table-1 means)") {
  BuyerCoeffs bc;  // defaults
  Buyer b = mk_buyer(0, 0, 1, 1e6, softplus(bc.mu_alpha));
  Seller s = mk_seller(0, 0, 3, 1.0, 1.0);

  CHECK(buyer_wtp(b, s, bc, 0.0) ==
        doctest::Approx(2.034014764615133).epsilon(1e-9));
  CHECK(buyer_wtp(b, s, bc, std::exp(1.0) - 1.0) ==
        doctest::Approx(0.890027830267967).epsilon(1e-9));

  BuyerCoeffs zero;
  zero.rho = zero.beta = zero.tau = zero.gamma = zero.phi = zero.kappa = 0.0;
  CHECK(buyer_wtp(b, s, zero, 10.0) == 0.0);
}

TEST_CASE("seller cost and WTA worked examples (Table-2 means)") {
  SellerCoeffs sc;  // defaults
  Seller s = mk_seller(0, 0, 2, 1.0, softplus(sc.mu_alpha));
  CHECK(seller_cost(s, sc, 1, 1) == doctest::Approx(8.887).epsilon(1e-12));
  CHECK(seller_cost(s, sc, 1, 3) - seller_cost(s, sc, 1, 1) ==
        doctest::Approx(2.0 * sc.beta_e).epsilon(1e-12));
  CHECK(seller_wta(s, sc, 1, 1) ==
        doctest::Approx(7.925567713935205).epsilon(1e-9));

  SellerCoeffs zero = plain_seller_coeffs(0.0);
  CHECK(seller_wta(s, zero, 1, 1) == 0.0);

  // WTA strictly decreasing in alpha for fixed cost
  double prev = 1e18;
  for (double a = 0.2; a < 3.0; a += 0.2) {
    Seller t = mk_seller(0, 0, 2, 1.0, a);
    double w = seller_wta(t, sc, 2, 2);
    CHECK(w < prev);
    prev = w;
  }
  CHECK_THROWS_AS(seller_cost(s, sc, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(seller_cost(s, sc, 1, 4), std::invalid_argument);
}

TEST_CASE("ratchet") {
  Seller s = mk_seller(0, 0, 1, 1.0, 1.0);
  CHECK(ratchet(s, 5.0) == 5.0);  // before first sale
  s.last_price = 7.0;
  CHECK(ratchet(s, 5.0) == 7.0);
}

TEST_CASE("bargain_price arithmetic and bracketing") {
  CHECK(bargain_price(10.0, 4.0, 2, 2) == doctest::Approx(7.0));
  CHECK(bargain_price(10.0, 4.0, 5, 1) == doctest::Approx(9.0));
  CHECK(bargain_price(10.0, 4.0, 1, 5) == doctest::Approx(5.0));
  CHECK_THROWS_AS(bargain_price(3.0, 4.0, 1, 1), std::logic_error);

  Pcg32 rng(12, 4);
  for (int i = 0; i < 1000; ++i) {
    double wta = rng.uniform(0.0, 50.0);
    double wtp = wta + rng.uniform(0.0, 50.0);
    int s = 1 + static_cast<int>(rng.bounded(5));
    int z = 1 + static_cast<int>(rng.bounded(5));
    double p = bargain_price(wtp, wta, s, z);
    CHECK(p >= wta);
    CHECK(p <= wtp);
  }
}

TEST_CASE("market_step: symmetric pair deals at the midpoint and pays from budget") {
  Fixture f;
  f.st.bc = plain_buyer_coeffs();
  f.st.sc = plain_seller_coeffs(4.0);
  f.st.buyers.push_back(mk_buyer(0, 5, 1, 100.0, 1.0));
  f.st.sellers.push_back(mk_seller(0, 5, 1, 10.0, 1.0));  // WTP 10, WTA 4
  f.finalize();
  int n = market_step(f.st, 1);
  REQUIRE(n == 1);
  const TradeRecord& r = f.st.trade_log[0];
  CHECK(r.price == doctest::Approx(7.0));
  CHECK(f.st.buyers[0].budget() == doctest::Approx(93.0));
  CHECK(f.st.buyers[0].x_stock == doctest::Approx(10.0));
  CHECK(f.st.sellers[0].last_price == doctest::Approx(7.0));
  CHECK(r.buyer_surplus == doctest::Approx(3.0));
  CHECK(r.seller_surplus == doctest::Approx(3.0));
  CHECK(r.externality == 0.0);

  // pair is now connected: no further trade between them
  CHECK(market_step(f.st, 2) == 0);
}

TEST_CASE("market_step: WTP <= WTA means no trade") {
  Fixture f;
  f.st.bc = plain_buyer_coeffs();
  f.st.sc = plain_seller_coeffs(10.0);  // WTA 10 = WTP 10
  f.st.buyers.push_back(mk_buyer(0, 5, 1, 100.0, 1.0));
  f.st.sellers.push_back(mk_seller(0, 5, 1, 10.0, 1.0));
  f.finalize();
  CHECK(market_step(f.st, 1) == 0);
  CHECK(f.st.trade_log.empty());
}

TEST_CASE("market_step: price above budget blocks the deal and leaves state alone") {
  Fixture f;
  f.st.bc = plain_buyer_coeffs();
  f.st.sc = plain_seller_coeffs(4.0);
  f.st.buyers.push_back(mk_buyer(0, 5, 1, 5.0, 1.0));  // price would be 7
  f.st.sellers.push_back(mk_seller(0, 5, 1, 10.0, 1.0));
  f.finalize();
  CHECK(market_step(f.st, 1) == 0);
  CHECK(f.st.buyers[0].budget() == 5.0);
  CHECK(f.st.buyers[0].x_stock == 0.0);
  CHECK(f.st.sellers[0].last_price == 0.0);
  // failed negotiation leaves the pair available later
  CHECK_FALSE(f.st.connections.contains(0, 0));
}

TEST_CASE("negative or zero WTP everywhere means no offers") {
  Fixture f;
  f.st.bc = plain_buyer_coeffs();
  f.st.bc.kappa = 100.0;  // distance kills every cross-cell valuation
  f.st.sc = plain_seller_coeffs(0.0);
  f.st.buyers.push_back(mk_buyer(0, 0, 1, 100.0, 1.0));
  f.st.sellers.push_back(mk_seller(0, 15, 1, 1.0, 1.0));
  f.finalize();
  CHECK(market_step(f.st, 1) == 0);
}

TEST_CASE("non-rivalry: one seller serves many distinct buyers; ratchet climbs") {
  Fixture f;
  f.st.bc = plain_buyer_coeffs();
  f.st.sc = plain_seller_coeffs(4.0);
  for (int i = 0; i < 3; ++i)
    f.st.buyers.push_back(mk_buyer(i, 5, 1, 1000.0, 1.0));
  f.st.sellers.push_back(mk_seller(0, 5, 1, 10.0, 1.0));
  f.finalize();
  double pkg_before = f.st.sellers[0].x_pkg;
  double last = 0.0;
  for (int t = 1; t <= 3; ++t) {
    CHECK(market_step(f.st, t) == 1);
    const TradeRecord& r = f.st.trade_log.back();
    CHECK(r.wta >= last);  // ratcheted WTA never falls across sales
    CHECK(r.price >= last);
    last = r.price;
  }
  CHECK(f.st.sellers[0].x_pkg == pkg_before);
  std::set<int> buyers_seen;
  for (const auto& r : f.st.trade_log) buyers_seen.insert(r.buyer_id);
  CHECK(buyers_seen.size() == 3);
  // exhausted: everyone connected
  CHECK(market_step(f.st, 4) == 0);
}

TEST_CASE("ties go to the lowest ids") {
  Fixture f;
  f.st.bc = plain_buyer_coeffs();
  f.st.sc = plain_seller_coeffs(4.0);
  // two identical buyers, two identical sellers in one cell
  for (int i = 0; i < 2; ++i) f.st.buyers.push_back(mk_buyer(i, 5, 1, 100.0, 1.0));
  for (int j = 0; j < 2; ++j) f.st.sellers.push_back(mk_seller(j, 5, 1, 10.0, 1.0));
  f.finalize();
  market_step(f.st, 1);
  REQUIRE(f.st.trade_log.size() == 1);  // both buyers target seller 0
  CHECK(f.st.trade_log[0].seller_id == 0);
  CHECK(f.st.trade_log[0].buyer_id == 0);  // acceptance tie -> lowest buyer id
}

TEST_CASE("argmax target is invariant to positive scaling of all WTPs") {
  Grid grid = build_grid(5, 5, 20.0);
  BuyerCoeffs bc;
  Pcg32 rng(31, 8);
  for (int trial = 0; trial < 50; ++trial) {
    Buyer b = mk_buyer(0, static_cast<int>(rng.bounded(25)), 2, 1e6, 1.0);
    std::vector<Seller> sellers;
    for (int j = 0; j < 10; ++j)
      sellers.push_back(mk_seller(j, static_cast<int>(rng.bounded(25)),
                                  1 + static_cast<int>(rng.bounded(5)),
                                  rng.log_uniform(0.5, 30.0), 1.0));
    auto argmax_with_alpha = [&](double alpha) {
      Buyer bb = b;
      bb.alpha = alpha;  // scales every WTP by 1/alpha
      int best = -1;
      double bw = 0.0;
      for (const Seller& s : sellers) {
        double w = buyer_wtp(bb, s, bc, grid.distance_km(bb.cell_id, s.cell_id));
        if (w > bw) {
          bw = w;
          best = s.id;
        }
      }
      return best;
    };
    CHECK(argmax_with_alpha(1.0) == argmax_with_alpha(0.25));
    CHECK(argmax_with_alpha(1.0) == argmax_with_alpha(3.5));
  }
}

TEST_CASE("money conservation is exact per buyer") {
  Fixture f;
  f.st.bc = BuyerCoeffs{};
  f.st.sc = SellerCoeffs{};
  Pcg32 rng(55, 2);
  for (int i = 0; i < 20; ++i)
    f.st.buyers.push_back(mk_buyer(i, static_cast<int>(rng.bounded(16)),
                                   1 + static_cast<int>(rng.bounded(5)),
                                   rng.log_uniform(1e2, 1e4),
                                   sample_alpha(0.6461, 0.0204, rng)));
  for (int j = 0; j < 20; ++j) {
    Seller s = mk_seller(j, static_cast<int>(rng.bounded(16)),
                         1 + static_cast<int>(rng.bounded(5)),
                         rng.log_uniform(5.0, 40.0),
                         sample_alpha(0.727, 0.432, rng));
    s.r_class = 1 + static_cast<int>(rng.bounded(3));
    f.st.sellers.push_back(s);
  }
  f.finalize();
  for (int t = 1; t <= 30; ++t) market_step(f.st, t);
  REQUIRE(f.st.trade_log.size() > 5);

  std::vector<double> replay(f.st.buyers.size(), 0.0);
  for (const auto& r : f.st.trade_log)
    replay[static_cast<std::size_t>(r.buyer_id)] += r.price;
  for (std::size_t i = 0; i < f.st.buyers.size(); ++i) {
    CHECK(f.st.buyers[i].spent == replay[i]);  // bitwise
    CHECK(f.st.buyers[i].budget() >= 0.0);
  }

  // price bracketing and surplus nonnegativity on every record
  for (const auto& r : f.st.trade_log) {
    CHECK(r.wta <= r.price);
    CHECK(r.price <= r.wtp);
    CHECK(r.buyer_surplus >= 0.0);
    CHECK(r.seller_surplus >= 0.0);
  }

  // no repeat pairs
  std::set<std::pair<int, int>> pairs;
  for (const auto& r : f.st.trade_log)
    CHECK(pairs.emplace(r.buyer_id, r.seller_id).second);
}
