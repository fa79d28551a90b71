#pragma once

#include <cstdint>

namespace spats {

// Counter-based 64-bit generator (SplitMix64). Bit-portable across platforms,
// cheap to fork into independent streams by hashing (seed, stream) pairs.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Deterministic child seed for stream `index` of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  SplitMix64 mix(base ^ (0xD6E8FEB86659FD93ULL * (index + 1)));
  mix.next();
  return mix.next();
}

}  // namespace spats
