#pragma once
// Deterministic random numbers. We roll our own generator instead of using
// <random> because the standard distributions are implementation-defined:
// a run seeded the same way must produce byte-identical tag streams on every
// platform. xoshiro256** supplies the raw stream, the splitmix64 finalizer
// seeds it and derives independent substreams.

#include <cmath>
#include <cstdint>
#include <string>

#include "cspdc/common.hpp"

namespace cspdc {

// splitmix64 output function. Good avalanche, used for seeding and for
// hashing (seed, domain, index) triples into substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // Expand the seed through splitmix64 per the xoshiro authors' advice.
    std::uint64_t sm = seed;
    for (auto& word : s_) {
      sm += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
    // All-zero state would stay stuck at zero. Cannot happen from splitmix
    // expansion in practice, but guard anyway.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 0x9e3779b97f4a7c15ull;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return u01() < p; }

  // Exponential with the given rate. -log1p(-u) keeps full precision for
  // small u and never evaluates log(0) since u < 1.
  double exponential(double rate) {
    if (!(rate > 0.0)) throw validation_error("exponential rate must be > 0");
    return -std::log1p(-u01()) / rate;
  }

  // Box-Muller, one deviate per call (the pair's second member is unused so
  // the draw count per call stays fixed).
  double gaussian(double sigma) {
    double u = 1.0 - u01();  // (0, 1]
    double v = u01();
    return sigma * std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Substream domains. One root seed per run; every consumer hashes its own
// (domain, index) so episodes can be replayed independently of each other.
enum class StreamDomain : std::uint64_t {
  heralds = 1,
  episode = 2,
};

inline Rng derive_stream(std::uint64_t root_seed, StreamDomain domain, std::uint64_t index) {
  std::uint64_t h = mix64(root_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(domain));
  h = mix64(h ^ index);
  return Rng(h);
}

}  // namespace cspdc
