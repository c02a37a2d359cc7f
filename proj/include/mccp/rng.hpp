#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mccp {

namespace detail {

// splitmix64: used for seeding and for mixing stream identifiers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Combines a seed with a stream index into a fresh 64-bit identity.
// Used everywhere a named sub-stream has to be derived from a master seed
// (per-trial seeds, per-sample seeds, ...); the derivation depends only on
// the two inputs, never on how many numbers anyone has drawn.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = detail::splitmix64(s);
  s = a ^ detail::rotl(stream, 29) ^ 0xA3EC647659359ACDULL;
  std::uint64_t b = detail::splitmix64(s);
  s = b + stream;
  return detail::splitmix64(s);
}

// Deterministic, splittable pseudo-random generator (xoshiro256**).
//
// Contract: the draw sequence is a pure function of the construction identity
// (seed, stream). child(salt) derives an independent generator from that
// identity alone -- not from the evolving state -- so the set of generators
// handed out to parallel workers is the same no matter which thread asks
// first or how far the parent has advanced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : identity_(derive_seed(seed, stream)) {
    std::uint64_t s = identity_;
    for (auto& word : state_) word = detail::splitmix64(s);
  }

  std::uint64_t identity() const { return identity_; }

  Rng child(std::uint64_t salt) const { return Rng(identity_, salt + 1); }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Standard normal via Box-Muller. The second variate of the pair is
  // discarded so one call always consumes exactly two uniforms.
  double next_normal() {
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Unbiased integer in [0, bound) by multiply-shift with rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t cutoff = (0 - bound) % bound;
      while (lo < cutoff) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t identity_;
  std::uint64_t state_[4];
};

}  // namespace mccp
