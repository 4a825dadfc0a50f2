#ifndef DATAMARKET_CALIBRATION_HPP_
#define DATAMARKET_CALIBRATION_HPP_

#include <cmath>
#include <stdexcept>

#include "datamarket/rng.hpp"

// Behavioral coefficients. Defaults are the posterior means of the
// reduced-form estimates; the full-form fields (gamma, phi, c1, delta)
// stay settable so the richer utility specifications can be exercised
// from config.

namespace datamkt {

struct BuyerCoeffs {
  double rho = 0.0087;         // stock decay in f(x) = exp(-rho x)
  double beta = 0.8093;        // volume weight
  double tau = 0.454;          // seller-tier weight
  double gamma = 0.0;          // buyer-tier weight (reduced form: 0)
  double phi = 0.0;            // tier-interaction weight (reduced form: 0)
  double mu_alpha = 0.6461;    // mean of raw price coefficient
  double sigma_alpha = 0.0204; // sd of raw price coefficient
  double kappa = 1.2212;       // distance weight

  void validate() const {
    if (sigma_alpha < 0.0 || rho < 0.0)
      throw std::invalid_argument("BuyerCoeffs: sigma_alpha and rho must be >= 0");
  }
};

struct SellerCoeffs {
  double c0 = 4.883;           // fixed cost
  double c1 = 0.0;             // seller-tier cost (reduced form: 0)
  double c2 = 0.32;            // volume cost
  double beta_r = 0.708;       // risk loading
  double beta_e = 2.976;       // enforcement loading
  double delta = 0.0;          // risk x enforcement interaction (reduced: 0)
  double mu_alpha = 0.727;
  double sigma_alpha = 0.432;

  void validate() const {
    if (sigma_alpha < 0.0)
      throw std::invalid_argument("SellerCoeffs: sigma_alpha must be >= 0");
  }
};

inline BuyerCoeffs default_buyer_coeffs() { return BuyerCoeffs{}; }
inline SellerCoeffs default_seller_coeffs() { return SellerCoeffs{}; }

// softplus keeps the price coefficient strictly positive.
inline double softplus(double x) {
  // log1p(exp(x)) overflows for large x; the identity below is exact there.
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// alpha = softplus(raw), raw ~ Normal(mu, sigma^2).
inline double sample_alpha(double mu, double sigma, Pcg32& rng) {
  if (sigma < 0.0) throw std::invalid_argument("sample_alpha: sigma < 0");
  double raw = (sigma == 0.0) ? mu : rng.normal(mu, sigma);
  return softplus(raw);
}

}  // namespace datamkt

#endif  // DATAMARKET_CALIBRATION_HPP_
