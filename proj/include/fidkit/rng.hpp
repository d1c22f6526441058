#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace fidkit::rng {

// SplitMix64 finalizer: the mixing core of every draw.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Counter-based stream keyed by (seed, module tag, row index). Draws are
// addressed by an explicit counter, so any coordinate of any row can be
// generated independently of scheduling order.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view tag, std::uint64_t row)
      : key_(splitmix64(splitmix64(splitmix64(seed) ^ fnv1a64(tag)) ^ row)) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ ^ (counter * 0xD1B54A32D192ED03ULL));
  }

  // Uniform on the open interval (0,1): 53-bit mantissa, never 0 or 1,
  // so log() and Box-Muller below are always finite.
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller (cosine branch); draw j consumes the
  // uniform pair at counters (2j, 2j+1).
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n) by the multiply-high mapping.
  std::uint64_t below(std::uint64_t counter, std::uint64_t n) const {
    if (n <= 1) return 0;
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits(counter)) * n) >> 64);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

// Deterministic sub-seed derivation, used to give experiment variants
// independent streams from one user-facing seed.
inline constexpr std::uint64_t derive(std::uint64_t seed, std::string_view tag,
                                      std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ fnv1a64(tag)) ^ index);
}

}  // namespace fidkit::rng
