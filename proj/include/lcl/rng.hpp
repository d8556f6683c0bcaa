#pragma once

#include <cstdint>
#include <random>

namespace lcl {

// Stream derivation: splitmix64 over the xor of base seed and stream id.
// Decouples consumers (babbling, init, batching, ...) so adding draws to one
// never shifts another.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base ^ (stream * 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic draws on top of mt19937_64. Distributions are hand-rolled
// because the standard library ones are not bit-stable across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on {0, ..., n-1} via multiply-shift with rejection, so the result
  // is exactly unbiased and reproducible.
  std::uint64_t uniform_u64(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    while (true) {
      const __uint128_t m = static_cast<__uint128_t>(gen_()) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  int uniform_index(int n) { return static_cast<int>(uniform_u64(static_cast<std::uint64_t>(n))); }

  // Random sign, +1 or -1.
  double sign() { return (gen_() & 1u) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lcl
