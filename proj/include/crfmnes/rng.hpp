#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace crfmnes {

// Seeded normal generator.
//
// Stream splitting: a (seed, stream) pair is expanded through std::seed_seq
// into a fresh mt19937_64 state, so streams with different ids never share a
// prefix. The library uses
//   stream 0 - candidate sampling of an optimizer,
//   stream 1 - random initial v.
// The harness gives trial k of an experiment the seed base_seed + k.
class Rng {
 public:
  static constexpr std::uint64_t kSamplingStream = 0;
  static constexpr std::uint64_t kInitStream = 1;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = kSamplingStream);

  double normal() { return normal_(engine_); }
  void fill_normal(std::span<double> out);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace crfmnes
