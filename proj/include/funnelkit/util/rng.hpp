#pragma once

// Deterministic, platform-stable random number generation. std::random
// distributions are implementation-defined, so samplers are hand-rolled
// on top of splitmix64 to keep seeded outputs byte-identical everywhere.

#include <cmath>
#include <cstdint>

namespace funnelkit {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97f4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal() {
    // Box-Muller; one value per call keeps the stream simple.
    double u1 = uniform01(), u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  int poisson(double mean) {
    // Knuth for small means, normal approximation above 30.
    if (mean <= 0) return 0;
    if (mean > 30) {
      double v = mean + std::sqrt(mean) * normal();
      return v < 0 ? 0 : static_cast<int>(std::lround(v));
    }
    double l = std::exp(-mean), p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= uniform01();
    } while (p > l);
    return k - 1;
  }

  Rng fork() { return Rng(next_u64() ^ 0xD1B54A32D192ED03ull); }

 private:
  std::uint64_t state_;
};

}  // namespace funnelkit
