#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace survadj {

// splitmix64 finalizer; the basis for all seed derivation.
uint64_t splitmix64(uint64_t x);

// Folds path components into a seed one splitmix64 step at a time.  Streams
// derived from distinct paths are independent for practical purposes and
// stable across platforms.
uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> path);

// Deterministic generator with explicitly pinned mappings: the uniform uses
// the top 52 bits of mt19937_64 output shifted into (0,1) (never 0 or 1, so
// log() is always safe), normals use Box-Muller.  std::distributions are
// implementation-defined and must not be used anywhere results matter.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Strictly inside (0,1): ((x >> 12) + 0.5) / 2^52.
  double uniform() { return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace survadj
