#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <random>

namespace logcl {

// SplitMix64 step; used to derive child seeds and per-id keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. All floating-point draws are built from the
// raw 64-bit output of std::mt19937_64 (whose sequence the standard pins
// down), never from distribution adaptors, so byte-identical replays only
// depend on libm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Zero-mean Gaussian via Box-Muller; keeps the spare draw.
  double normal(double sigma = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_ * sigma;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta) * sigma;
  }

  // Independent child stream; deterministic in (seed, salt).
  Rng fork(std::uint64_t salt) const { return Rng(splitmix64(seed_ ^ splitmix64(salt))); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace logcl
