#pragma once
// PCG32 (XSH-RR, 64-bit state) plus the splitmix64 mixer used for run seeds.
//
// One Rng instance carries a whole run: static scene sampling consumes the
// head of the stream and behaviors continue drawing from the same instance.

#include <cstddef>
#include <cstdint>

namespace scenegen {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;

  /// Seeds with the stream selector equal to the seed itself.
  explicit Rng(std::uint64_t seed) : Rng(seed, seed) {}

  /// Reference PCG32 seeding (pcg32_srandom_r).
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed) {
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * kMultiplier + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  /// First 32-bit output forms the high word.
  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32u) | lo;
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t state() const { return state_; }
  std::uint64_t increment() const { return inc_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

/// FNV-1a over raw bytes; identifies scenario sources in manifests and hellos.
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-run seed: splitmix64 of (base + run index) xor the program hash.
inline constexpr std::uint64_t run_seed(std::uint64_t baseSeed, std::uint64_t runIndex,
                                        std::uint64_t programHash) {
  return splitmix64((baseSeed + runIndex) ^ programHash);
}

}  // namespace scenegen
