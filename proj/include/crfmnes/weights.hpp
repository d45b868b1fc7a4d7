#pragma once

// Recombination weights. Both kinds are indexed by rank (index 0 = best) and
// sum to zero.

#include <cstddef>
#include <span>
#include <vector>

#include "crfmnes/common.hpp"

namespace crfmnes {

enum class WeightKind { rank, distance };

struct WeightSet {
  Vector w;
  WeightKind kind = WeightKind::rank;

  std::size_t size() const { return w.size(); }
  double operator[](std::size_t i) const { return w[i]; }
};

struct WeightConstants {
  double mu_eff = 1.0;
  double alpha_dist = 1.0;
};

// max(0, ln(lambda/2 + 1) - ln(i)), i = 1..lambda. Unnormalized.
Vector rank_weights_hat(std::size_t lambda);

// Throws std::invalid_argument unless lambda >= 2 and even.
WeightSet rank_weights(std::size_t lambda);

double mu_eff(std::size_t lambda);

// Distance weights from the norms ||z_i|| listed in rank order. The
// exponential factor is shifted by max ||z|| before exponentiation, which
// cancels in the normalization. Throws if alpha <= 0.
WeightSet distance_weights_from_norms(std::span<const double> z_norms, double alpha);
WeightSet distance_weights(std::span<const Vector> z_sorted, double alpha);

// Positive root of (1 + x^2) exp(x^2 / 2) / 0.24 - 10 - d.
double h_inv(std::size_t d);

// alpha = h_inv(d) * min(1, sqrt(lambda / d)).
double alpha_dist(std::size_t d, std::size_t lambda);

WeightConstants weight_constants(std::size_t d, std::size_t lambda);

}  // namespace crfmnes
