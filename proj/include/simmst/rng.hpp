#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "simmst/error.hpp"

namespace simmst {

// Deterministic random source. The standard fixes the mt19937_64 bit stream
// exactly, but std::uniform_real_distribution, std::normal_distribution and
// std::shuffle are implementation-defined, so every distribution is pinned
// here. Same seed, same platform-independent sequence.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; consumes exactly two draws per call.
  double normal(double mean = 0.0, double stdev = 1.0) {
    double u1 = 1.0 - uniform01();  // (0,1], keeps the log finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stdev * r * std::cos(2.0 * M_PI * u2);
  }

  // Unbiased integer in [0, n) by rejection sampling.
  uint64_t below(uint64_t n) {
    if (n == 0) throw ContractError("Rng::below: n must be positive");
    uint64_t rem = UINT64_MAX % n;
    uint64_t limit = UINT64_MAX - rem;  // multiples of n fit below this
    for (;;) {
      uint64_t draw = engine_();
      if (draw < limit || rem == n - 1) return draw % n;
    }
  }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace simmst
