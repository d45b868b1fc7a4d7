#pragma once

// Per-generation state updates: evolution paths, search phase, learning
// rates, mean, v/D and sigma.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "crfmnes/common.hpp"
#include "crfmnes/distribution.hpp"
#include "crfmnes/natgrad.hpp"
#include "crfmnes/weights.hpp"

namespace crfmnes {

enum class Phase { movement, stagnation, convergence };

std::string_view to_string(Phase phase);

struct EvolutionState {
  Vector p_sigma;
  Vector p_c;
  std::uint64_t t = 0;
  Phase phase = Phase::movement;

  static EvolutionState zeros(std::size_t d) { return {Vector(d, 0.0), Vector(d, 0.0), 0, Phase::movement}; }
};

struct LearningRates {
  double c_sigma = 0.0;
  double c_c = 0.0;
  double eta_m = 1.0;
  double eta_sigma_move = 1.0;
  double eta_sigma_stag = 0.0;
  double eta_sigma_conv = 0.0;
  double eta_b = 0.0;
  double c1 = 0.0;
  double c1_cma = 0.0;

  double eta_sigma(Phase phase) const;
};

// sqrt(d) (1 - 1/(4d) + 1/(21 d^2)).
double expected_norm(std::size_t d);

Phase detect_phase(double p_sigma_norm, double upsilon);

LearningRates learning_rates(std::size_t d, std::size_t lambda);

// p_sigma <- (1 - c_sigma) p_sigma + sqrt(c_sigma (2 - c_sigma) mu_eff) sum_i w_i z_i,
// always with rank weights.
void update_p_sigma(EvolutionState& state, const Population& pop, const WeightSet& rank,
                    double c_sigma, double mu_eff);

// sum_i w_i (x_i - m).
Vector weighted_step(const Population& pop, const WeightSet& weights,
                     const DistributionParams& params);

// p_c <- (1 - c_c) p_c + sqrt(c_c (2 - c_c) mu_eff) step / sigma.
void update_p_c(EvolutionState& state, std::span<const double> step, double sigma, double c_c,
                double mu_eff);
void update_p_c(EvolutionState& state, const Population& pop, const WeightSet& weights,
                const DistributionParams& params, double c_c, double mu_eff);

// m <- m + eta_m step.
void update_mean(DistributionParams& params, std::span<const double> step, double eta_m);
void update_mean(DistributionParams& params, const Population& pop, const WeightSet& weights,
                 double eta_m);

struct VdUpdateReport {
  std::size_t d_clamps = 0;   // diagonal entries held at 1e-12 x previous value
  bool v_rescaled = false;    // ||v|| was lifted to kMinVNorm
};

// v <- v + eta_b grad_v + c1 rank_one_v, D <- D + eta_b grad_d + c1 rank_one_d.
// Does not normalize; call normalize_d afterwards.
VdUpdateReport update_v_d(DistributionParams& params, const NaturalGradient& grad, double eta_b,
                          double c1);

// Divides D by detA^(1/2d), detA = (prod D_i)^2 (1 + ||v||^2). Returns detA
// before normalization. Throws NumericalError for a non-finite or
// non-positive determinant.
double normalize_d(DistributionParams& params);

// sigma <- sigma exp(eta_sigma / 2 * g_sigma).
void update_sigma(DistributionParams& params, double g_sigma, double eta_sigma);

}  // namespace crfmnes
