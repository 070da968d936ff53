#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bmu {

// 64-bit Mersenne Twister with a portable uniform mapping. The standard
// distributions are implementation-defined, so golden values would differ
// between standard libraries; the helpers below only use raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Derive an independent stream from a seed and a stream tag.
  static Rng derived(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    Rng rng;
    rng.engine_.seed(seq);
    return rng;
  }

  void reseed(std::uint64_t seed) { engine_.seed(seed); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

  // Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(canonical() * n); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bmu
