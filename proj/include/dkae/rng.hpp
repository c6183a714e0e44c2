#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace dkae {

// xoshiro256++ generator seeded through splitmix64. The integer and uniform
// streams are reproducible bit-for-bit from the seed on any platform; normal
// draws additionally depend on the platform's libm (log/sin/cos rounding).
//
// Instances are single-owner: do not share one generator across concurrent
// tasks. Use split() to derive independent streams instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; draws come in cached pairs.
  double normal();
  double normal(double mean, double stddev);

  // Uniform on {0, ..., bound-1}, unbiased (rejection of the short cycle).
  std::size_t uniform_index(std::size_t bound);

  // First k entries of a random permutation of {0, ..., n-1}.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  void shuffle(std::vector<std::size_t>& values);

  // Independent generator derived from this generator's *seed* and a stream
  // index; unaffected by draws already made. Child seed is
  // splitmix64(seed ^ 0x9E3779B97F4A7C15 * (stream + 1)).
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace dkae
