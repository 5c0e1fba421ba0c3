#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

namespace gblobs {

/// SplitMix64 mixing step. Stateless form: maps any 64-bit value to a
/// well-scrambled 64-bit value. Used for seeding and stream derivation.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a stream index.
/// Definition: splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0xA5A5A5A5A5A5A5A5)).
/// The same (seed, stream) pair always yields the same derived seed, on every
/// platform; distinct streams are decorrelated by the double mixing.
inline uint64_t derive_stream(uint64_t seed, uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0xA5A5A5A5A5A5A5A5ull));
}

/// Two-level stream derivation for (salt, index) addressing, e.g. per-object
/// or per-scene streams under a named substream family.
inline uint64_t derive_stream(uint64_t seed, uint64_t salt, uint64_t index) {
  return derive_stream(derive_stream(seed, salt), index);
}

/// Deterministic PRNG: xoshiro256++ (Blackman & Vigna), state seeded via
/// SplitMix64. No std:: distributions are used anywhere in the project, so
/// every draw sequence is identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t s = seed;
    for (auto& word : state_) {
      s = splitmix64(s);
      word = s;
    }
  }

  /// Next raw 64-bit value.
  uint64_t next() {
    const uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). Unbiased via rejection sampling.
  /// bound must be nonzero.
  uint64_t below(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller. One value per call (the sine partner is
  /// discarded) so the draw count per sample is fixed and documented: exactly
  /// two raw draws per normal.
  double normal() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::array<uint64_t, 4> state_;
};

}  // namespace gblobs
