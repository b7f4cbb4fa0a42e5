#pragma once

#include <cstdint>
#include <random>

namespace sqdqn {

// Seeded random source with portable output. std::mt19937_64 is fully
// specified by the standard, and the mappings below avoid
// std::uniform_*_distribution, whose results differ between standard
// library implementations. Same seed => same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased uniform integer in [0, n). n must be positive.
  int uniform_int(int n) {
    const auto bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<int>(x % bound);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sqdqn
