#ifndef DATAMARKET_ANALYSIS_HPP_
#define DATAMARKET_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "datamarket/csv.hpp"

// Two-way fixed-effects estimator: demean by seed and by time (add back the
// grand mean), OLS on the transformed data, CR1 cluster-robust covariance
// clustered at the seed level. Panels here are balanced in the (seed, time)
// margins, where the within transformation coincides with dummy-variable OLS.

namespace datamkt {

namespace linalg {

// Solves A x = b in place (A is n x n, row-major) by Gaussian elimination
// with partial pivoting. Throws on rank deficiency.
inline std::vector<double> solve(std::vector<double> A, std::vector<double> b,
                                 int n) {
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(A[i * n + i]));
  if (scale == 0.0) scale = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
    if (std::abs(A[piv * n + col]) < 1e-10 * scale)
      throw std::runtime_error(
          "fe_regress: rank-deficient design (treatment collinear after "
          "demeaning)");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = A[r * n + col] / A[col * n + col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int c = i + 1; c < n; ++c) s -= A[i * n + c] * x[c];
    x[i] = s / A[i * n + i];
  }
  return x;
}

inline std::vector<double> invert(const std::vector<double>& A, int n) {
  std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    e[j] = 1.0;
    auto col = solve(A, std::move(e), n);
    for (int i = 0; i < n; ++i) inv[i * n + j] = col[i];
  }
  return inv;
}

}  // namespace linalg

struct FeTerm {
  std::string name;
  double coef = 0.0;
  double se = 0.0;
  double t_stat = 0.0;
};

struct FeEstimate {
  std::vector<FeTerm> terms;
  long n_obs = 0;
  int n_clusters = 0;
  double r2_within = 0.0;  // R^2 on the demeaned data
};

// y: outcome (n). X: treatments, column-major blocks (p vectors of length n).
// seed/time: fixed-effect group labels per row. Clustering is by seed.
inline FeEstimate fe_regress(const std::vector<double>& y,
                             const std::vector<std::vector<double>>& X,
                             const std::vector<std::string>& names,
                             const std::vector<std::uint64_t>& seed,
                             const std::vector<int>& time) {
  const std::size_t n = y.size();
  const int p = static_cast<int>(X.size());
  if (p == 0) throw std::invalid_argument("fe_regress: no treatments");
  if (names.size() != X.size())
    throw std::invalid_argument("fe_regress: names/treatments mismatch");
  if (seed.size() != n || time.size() != n)
    throw std::invalid_argument("fe_regress: column length mismatch");
  for (const auto& col : X)
    if (col.size() != n)
      throw std::invalid_argument("fe_regress: column length mismatch");

  std::map<std::uint64_t, int> seed_ix;
  std::map<int, int> time_ix;
  for (std::size_t i = 0; i < n; ++i) {
    seed_ix.emplace(seed[i], static_cast<int>(seed_ix.size()));
    time_ix.emplace(time[i], static_cast<int>(time_ix.size()));
  }
  const int S = static_cast<int>(seed_ix.size());
  const int T = static_cast<int>(time_ix.size());
  if (S < 2) throw std::invalid_argument("fe_regress: need >= 2 seeds (clusters)");
  if (T < 2) throw std::invalid_argument("fe_regress: need >= 2 periods");

  auto demean = [&](const std::vector<double>& v) {
    std::vector<double> ms(static_cast<std::size_t>(S), 0.0);
    std::vector<double> mt(static_cast<std::size_t>(T), 0.0);
    std::vector<double> ns(static_cast<std::size_t>(S), 0.0);
    std::vector<double> nt(static_cast<std::size_t>(T), 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int si = seed_ix[seed[i]];
      int ti = time_ix[time[i]];
      ms[si] += v[i];
      ns[si] += 1.0;
      mt[ti] += v[i];
      nt[ti] += 1.0;
      grand += v[i];
    }
    for (int s2 = 0; s2 < S; ++s2) ms[s2] /= ns[s2];
    for (int t2 = 0; t2 < T; ++t2) mt[t2] /= nt[t2];
    grand /= static_cast<double>(n);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = v[i] - ms[seed_ix[seed[i]]] - mt[time_ix[time[i]]] + grand;
    return out;
  };

  std::vector<double> yt = demean(y);
  std::vector<std::vector<double>> Xt;
  Xt.reserve(X.size());
  for (const auto& col : X) Xt.push_back(demean(col));

  // normal equations
  std::vector<double> A(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> bvec(static_cast<std::size_t>(p), 0.0);
  for (int a = 0; a < p; ++a) {
    for (int b2 = a; b2 < p; ++b2) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += Xt[a][i] * Xt[b2][i];
      A[a * p + b2] = A[b2 * p + a] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += Xt[a][i] * yt[i];
    bvec[a] = s;
  }
  std::vector<double> beta = linalg::solve(A, bvec, p);

  // residuals and fit
  std::vector<double> u(n);
  double ssr = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (int a = 0; a < p; ++a) fit += beta[a] * Xt[a][i];
    u[i] = yt[i] - fit;
    ssr += u[i] * u[i];
    tss += yt[i] * yt[i];
  }

  // CR1 cluster-robust covariance, clusters = seeds
  std::vector<double> meat(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<std::vector<double>> score(
      static_cast<std::size_t>(S), std::vector<double>(static_cast<std::size_t>(p), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    int g = seed_ix[seed[i]];
    for (int a = 0; a < p; ++a) score[g][a] += Xt[a][i] * u[i];
  }
  for (int g = 0; g < S; ++g)
    for (int a = 0; a < p; ++a)
      for (int b2 = 0; b2 < p; ++b2) meat[a * p + b2] += score[g][a] * score[g][b2];

  const double N = static_cast<double>(n);
  const double G = static_cast<double>(S);
  // parameters of the equivalent dummy regression: intercept + treatments
  // + (S-1) seed dummies + (T-1) time dummies
  const double K = 1.0 + p + (S - 1) + (T - 1);
  double cr1 = (G / (G - 1.0)) * ((N - 1.0) / (N - K));

  std::vector<double> Ainv = linalg::invert(A, p);
  FeEstimate est;
  est.n_obs = static_cast<long>(n);
  est.n_clusters = S;
  est.r2_within = tss > 0.0 ? 1.0 - ssr / tss : 0.0;
  for (int a = 0; a < p; ++a) {
    double var = 0.0;
    for (int i2 = 0; i2 < p; ++i2)
      for (int j2 = 0; j2 < p; ++j2)
        var += Ainv[a * p + i2] * meat[i2 * p + j2] * Ainv[j2 * p + a];
    var *= cr1;
    FeTerm term;
    term.name = names[static_cast<std::size_t>(a)];
    term.coef = beta[static_cast<std::size_t>(a)];
    term.se = var > 0.0 ? std::sqrt(var) : 0.0;
    term.t_stat = term.se > 0.0 ? term.coef / term.se : 0.0;
    est.terms.push_back(term);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Panel container + CSV loading for the CLI path

struct Panel {
  std::vector<std::uint64_t> seed;
  std::vector<int> t;
  std::vector<std::string> regime;
  std::vector<double> share;
  std::map<std::string, std::vector<double>> numeric;  // KPI columns

  std::size_t n() const { return seed.size(); }
  const std::vector<double>& column(const std::string& name) const {
    auto it = numeric.find(name);
    if (it == numeric.end())
      throw std::runtime_error("panel: unknown column '" + name + "'");
    return it->second;
  }
};

inline Panel load_panel_csv(const std::string& path) {
  auto tab = csv::read_file(path);
  Panel p;
  int c_seed = tab.require_column("seed");
  int c_regime = tab.require_column("regime");
  int c_share = tab.require_column("share");
  int c_t = tab.require_column("t");
  std::vector<std::pair<std::string, int>> kpi_cols;
  for (const char* name : {"trades", "volume", "buyer_surplus",
                           "seller_surplus", "externality", "total_welfare"})
    kpi_cols.emplace_back(name, tab.require_column(name));
  for (const auto& row : tab.rows) {
    p.seed.push_back(static_cast<std::uint64_t>(
        csv::to_long(row[static_cast<std::size_t>(c_seed)])));
    p.regime.push_back(row[static_cast<std::size_t>(c_regime)]);
    p.share.push_back(csv::to_double(row[static_cast<std::size_t>(c_share)]));
    p.t.push_back(
        static_cast<int>(csv::to_long(row[static_cast<std::size_t>(c_t)])));
    for (auto& [name, col] : kpi_cols)
      p.numeric[name].push_back(
          csv::to_double(row[static_cast<std::size_t>(col)]));
  }
  return p;
}

// Dummy columns for every non-baseline regime present (baseline is the
// dropped reference and must be present).
inline std::pair<std::vector<std::vector<double>>, std::vector<std::string>>
regime_dummies(const Panel& p) {
  std::set<std::string> kinds(p.regime.begin(), p.regime.end());
  if (!kinds.count("baseline"))
    throw std::runtime_error("regime dummies: panel lacks a baseline reference");
  kinds.erase("baseline");
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (const auto& k : kinds) {
    std::vector<double> col(p.n(), 0.0);
    for (std::size_t i = 0; i < p.n(); ++i)
      if (p.regime[i] == k) col[i] = 1.0;
    cols.push_back(std::move(col));
    names.push_back(k);
  }
  return {cols, names};
}

inline FeEstimate fe_regress_panel(const Panel& p, const std::string& outcome,
                                   const std::string& treatment) {
  std::vector<std::vector<double>> X;
  std::vector<std::string> names;
  if (treatment == "regime") {
    auto [cols, nm] = regime_dummies(p);
    X = std::move(cols);
    names = std::move(nm);
  } else if (treatment == "share") {
    X.push_back(p.share);
    names.push_back("share");
  } else {
    X.push_back(p.column(treatment));
    names.push_back(treatment);
  }
  return fe_regress(p.column(outcome), X, names, p.seed, p.t);
}

}  // namespace datamkt

#endif  // DATAMARKET_ANALYSIS_HPP_
