#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace psc {

// SplitMix64 (Steele, Lea & Flood). The state advances by the golden-gamma
// constant 0x9E3779B97F4A7C15 and each output is the mixed state:
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z ^= z >> 31
// Every derived quantity below is computed from this stream with explicit
// arithmetic so results reproduce bit-for-bit across standard libraries.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection (no modulo bias). bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  // Standard normal via the Box-Muller transform (one value per call).
  double normal() noexcept;

  // Independent child stream, e.g. one per restart or per trial.
  SplitMix64 fork() noexcept { return SplitMix64((*this)() ^ 0xD1B54A32D192ED03ULL); }

 private:
  std::uint64_t state_;
};

// First `count` entries of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    SplitMix64& rng);

// Full seeded shuffle of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng);

}  // namespace psc
