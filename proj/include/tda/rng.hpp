#pragma once

#include <cstdint>

namespace tda {

// splitmix64 finalizer; used both as a mixer for deriving sub-streams and
// as the step function of Rng.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic splitmix64 generator. Self-contained so that sampled
// sequences do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) via rejection sampling; n must be > 0.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0ULL - n) % n;
    while (true) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  double uniform01() {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

 private:
  uint64_t state_;
};

// Derives an independent stream seed from a run seed and stream labels.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
  return mix64(mix64(seed ^ 0x8f1bbcdcbfa53e0bULL) ^ mix64(a) ^ (b * 0xd6e8feb86659fd93ULL));
}

}  // namespace tda
