#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gnp {

// Deterministic pseudorandom stream.
//
// Bits come from std::mt19937_64 (fully specified by the standard). Uniforms
// take the top 53 bits of one draw scaled by 2^-53; normals use the
// Box-Muller transform on two uniforms and cache the second variate.
// Substreams are seeded with splitmix64(seed ^ fnv1a64(label)), so a substream
// depends only on the parent seed and its label, never on how far the parent
// has advanced.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Independent stream identified by (seed, label).
  RandomStream substream(std::string_view label) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace gnp
