#include "crfmnes/rng.hpp"

namespace crfmnes {

namespace {
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(make_engine(seed, stream)) {}

void Rng::fill_normal(std::span<double> out) {
  for (double& x : out) x = normal_(engine_);
}

}  // namespace crfmnes
