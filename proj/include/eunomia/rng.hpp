#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "eunomia/hash.hpp"

namespace eunomia {

/// SplitMix64 step; used to derive independent stream seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seeded generator with portable draws (the std distributions are not
/// specified bit-exactly across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t master, std::uint64_t stream) : engine_(splitmix64(master ^ splitmix64(stream + 1))) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return v % n;
  }
  /// Poisson(lambda) by inversion; fine for the small rates used here.
  std::uint64_t poisson(double lambda) {
    if (lambda <= 0) return 0;
    if (lambda > 30) {
      double x = std::round(lambda + std::sqrt(lambda) * normal());
      return x < 0 ? 0 : static_cast<std::uint64_t>(x);
    }
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  Hash hash() {
    Hash h;
    for (int i = 0; i < 4; ++i) {
      const auto v = engine_();
      for (int b = 0; b < 8; ++b) h.bytes[8 * i + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    return h;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace eunomia
