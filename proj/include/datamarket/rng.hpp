#ifndef DATAMARKET_RNG_HPP_
#define DATAMARKET_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

// Deterministic random streams. Every draw site in a run pulls from a
// substream derived from (master seed, purpose label), so adding a new
// draw site never perturbs existing streams and regimes under the same
// master seed see identical populations (common random numbers).

namespace datamkt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// PCG32 (O'Neill, pcg-random.org). Small, fast, reproducible across
// platforms; std engines/distributions are not bit-stable so they are
// not used anywhere in the simulation path.
class Pcg32 {
 public:
  Pcg32() : Pcg32(0x853C49E6748FEA9BULL, 0xDA3E39CB94B95BDBULL) {}
  Pcg32(std::uint64_t seed, std::uint64_t seq) {
    state_ = 0u;
    inc_ = (seq << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    return (static_cast<std::uint64_t>(next_u32()) << 32) | next_u32();
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Log-uniform on [lo, hi), lo > 0.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // Unbiased bounded integer in [0, n) (Lemire's method).
  std::uint32_t bounded(std::uint32_t n) {
    std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * n;
    std::uint32_t lo = static_cast<std::uint32_t>(m);
    if (lo < n) {
      std::uint32_t thresh = (0u - n) % n;
      while (lo < thresh) {
        m = static_cast<std::uint64_t>(next_u32()) * n;
        lo = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via the Marsaglia polar method. Fixed algorithm so
  // seeded runs reproduce bit-identically on any platform.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double mul = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * mul;
    have_spare_ = true;
    return u * mul;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = bounded(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Substream labels used by a simulation run. Kept in one place so the
// derivation scheme is auditable.
namespace stream {
inline constexpr std::string_view kAgentInit = "agents/init";
inline constexpr std::string_view kRisk = "env/risk";
inline constexpr std::string_view kEnforce = "env/enforce";
inline constexpr std::string_view kShuffle = "market/shuffle";
inline constexpr std::string_view kAccess = "regime/access";
}  // namespace stream

inline Pcg32 substream(std::uint64_t master_seed, std::string_view label) {
  std::uint64_t s = master_seed ^ fnv1a64(label);
  std::uint64_t seed = splitmix64(s);
  std::uint64_t seq = splitmix64(s);
  return Pcg32(seed, seq);
}

}  // namespace datamkt

#endif  // DATAMARKET_RNG_HPP_
