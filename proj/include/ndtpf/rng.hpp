// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <random>

namespace ndtpf {

// SplitMix64 finalizer (Steele, Lea & Flood 2014). The additive constant is
// the 64-bit golden ratio; the multipliers are the published mix constants.
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGoldenGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Top 53 bits to a double in [0, 1).
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based stream: value i of stream `key` is splitmix64(key ^ mix(i)).
// Addressable, so any (seed, take, segment, dim) draw can be recomputed alone.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(splitmix64(key)) {}

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ ^ splitmix64(counter * kGoldenGamma));
  }
  double unit(std::uint64_t counter) const noexcept {
    return bits_to_unit(bits(counter));
  }
  // U[-1, 1)
  double symmetric(std::uint64_t counter) const noexcept {
    return 2.0 * unit(counter) - 1.0;
  }

 private:
  std::uint64_t key_;
};

// Seed of take `index` derived from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base) + index * kGoldenGamma);
}

// Sequential generator for initialization, shuffling and data synthesis.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return bits_to_unit(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Inclusive range.
  long uniform_int(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(engine_() % span);
  }
  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ndtpf
