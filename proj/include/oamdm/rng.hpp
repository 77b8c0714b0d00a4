#pragma once

#include <cmath>
#include <cstdint>

namespace oamdm {

/// Counter-based substream generator built on SplitMix64.
///
/// A stream is keyed by hashing the master seed with an arbitrary list of
/// integer labels (run index, ell, basis, port, ...). Identical keys always
/// produce identical sequences, independent of evaluation order, which is
/// what makes parallel per-ell simulation deterministic.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Derive a substream key from the master seed and up to four labels.
  static uint64_t substream_key(uint64_t master, uint64_t a, uint64_t b = 0,
                                uint64_t c = 0, uint64_t d = 0) {
    uint64_t k = mix(master);
    k = mix(k ^ (a + 0x632be59bd9b4e019ULL));
    k = mix(k ^ (b + 0x9e6c63d0876a9a47ULL));
    k = mix(k ^ (c + 0xb5c0fbcf3e36a6c5ULL));
    k = mix(k ^ (d + 0xd6e8feb86659fd93ULL));
    return k;
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in (0, 1).
  double next_double() {
    // 53 random bits; offset by half an ulp to exclude exact 0.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

 private:
  uint64_t state_;
};

/// Poisson sampling: CDF inversion for small means, Hormann's PTRD
/// transformed-rejection for large ones.
uint64_t poisson_sample(SplitMix64& rng, double mean);

/// Standard normal via Box-Muller (two uniforms per call, no caching, so
/// draw counts stay deterministic per call site).
double normal_sample(SplitMix64& rng);

}  // namespace oamdm
