#include "crfmnes/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crfmnes/kernels.hpp"

namespace crfmnes {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::movement:
      return "movement";
    case Phase::stagnation:
      return "stagnation";
    case Phase::convergence:
      return "convergence";
  }
  return "unknown";
}

double LearningRates::eta_sigma(Phase phase) const {
  switch (phase) {
    case Phase::movement:
      return eta_sigma_move;
    case Phase::stagnation:
      return eta_sigma_stag;
    case Phase::convergence:
      return eta_sigma_conv;
  }
  return eta_sigma_move;
}

double expected_norm(std::size_t d) {
  const double dd = static_cast<double>(d);
  return std::sqrt(dd) * (1.0 - 1.0 / (4.0 * dd) + 1.0 / (21.0 * dd * dd));
}

Phase detect_phase(double p_sigma_norm, double upsilon) {
  if (p_sigma_norm >= upsilon) return Phase::movement;
  if (p_sigma_norm >= 0.1 * upsilon) return Phase::stagnation;
  return Phase::convergence;
}

LearningRates learning_rates(std::size_t d, std::size_t lambda) {
  const double dd = static_cast<double>(d);
  const double lam = static_cast<double>(lambda);
  const double mu = mu_eff(lambda);

  LearningRates lr;
  lr.c_sigma = (mu + 2.0) / (dd + mu + 5.0);
  lr.c_c = (4.0 + mu / dd) / (dd + 4.0 + 2.0 * mu / dd);
  lr.eta_m = 1.0;
  lr.eta_sigma_move = 1.0;
  lr.eta_sigma_stag = std::tanh((0.024 * lam + 0.7 * dd + 20.0) / (dd + 12.0));
  lr.eta_sigma_conv = 2.0 * std::tanh((0.025 * lam + 0.75 * dd + 10.0) / (dd + 4.0));
  lr.c1_cma = 2.0 / ((dd + 1.3) * (dd + 1.3) + mu);
  // (d - 5) / 6 turns negative below d = 6; the rank-one term is switched off there.
  lr.c1 = std::max(0.0, (dd - 5.0) / 6.0 * lr.c1_cma);
  lr.eta_b = std::tanh((std::min(0.02 * lam, 3.0 * std::log(dd)) + 5.0) / (0.23 * dd + 25.0));
  return lr;
}

void update_p_sigma(EvolutionState& state, const Population& pop, const WeightSet& rank,
                    double c_sigma, double mu_eff) {
  const std::size_t d = state.p_sigma.size();
  Vector wz(d, 0.0);
  for (std::size_t i = 0; i < pop.size(); ++i) kernels::axpy(rank[i], pop.candidates[i].z, wz);
  const double keep = 1.0 - c_sigma;
  const double gain = std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff);
  for (std::size_t j = 0; j < d; ++j) state.p_sigma[j] = keep * state.p_sigma[j] + gain * wz[j];
}

Vector weighted_step(const Population& pop, const WeightSet& weights,
                     const DistributionParams& params) {
  const std::size_t d = params.dim();
  Vector step(d, 0.0);
  Vector diff(d);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const Vector& x = pop.candidates[i].x;
    for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - params.m[j];
    kernels::axpy(weights[i], diff, step);
  }
  return step;
}

void update_p_c(EvolutionState& state, std::span<const double> step, double sigma, double c_c,
                double mu_eff) {
  const double keep = 1.0 - c_c;
  const double gain = std::sqrt(c_c * (2.0 - c_c) * mu_eff);
  for (std::size_t j = 0; j < state.p_c.size(); ++j)
    state.p_c[j] = keep * state.p_c[j] + gain * (step[j] / sigma);
}

void update_p_c(EvolutionState& state, const Population& pop, const WeightSet& weights,
                const DistributionParams& params, double c_c, double mu_eff) {
  update_p_c(state, weighted_step(pop, weights, params), params.sigma, c_c, mu_eff);
}

void update_mean(DistributionParams& params, std::span<const double> step, double eta_m) {
  kernels::axpy(eta_m, step, params.m);
}

void update_mean(DistributionParams& params, const Population& pop, const WeightSet& weights,
                 double eta_m) {
  const Vector step = weighted_step(pop, weights, params);
  update_mean(params, step, eta_m);
}

VdUpdateReport update_v_d(DistributionParams& params, const NaturalGradient& grad, double eta_b,
                          double c1) {
  const std::size_t d = params.dim();
  VdUpdateReport report;

  const double old_norm = std::sqrt(kernels::sum_squares(params.v));
  Vector old_vbar(params.v);
  for (double& x : old_vbar) x /= old_norm;

  for (std::size_t j = 0; j < d; ++j) {
    params.v[j] += eta_b * grad.grad_v[j] + c1 * grad.rank_one_v[j];
    const double prev = params.d_diag[j];
    double next = prev + eta_b * grad.grad_d[j] + c1 * grad.rank_one_d[j];
    const double floor = 1e-12 * prev;
    if (!std::isfinite(next)) throw NumericalError("update_v_d: non-finite D entry");
    if (next <= floor) {
      next = floor;
      ++report.d_clamps;
    }
    params.d_diag[j] = next;
  }

  const double norm2 = kernels::sum_squares(params.v);
  if (!std::isfinite(norm2)) throw NumericalError("update_v_d: non-finite v");
  const double norm = std::sqrt(norm2);
  if (norm < kMinVNorm) {
    report.v_rescaled = true;
    if (norm > 0.0) {
      for (double& x : params.v) x *= kMinVNorm / norm;
    } else {
      for (std::size_t j = 0; j < d; ++j) params.v[j] = kMinVNorm * old_vbar[j];
    }
  }
  return report;
}

double normalize_d(DistributionParams& params) {
  for (double di : params.d_diag)
    if (!(di > 0.0)) throw NumericalError("normalize_d: non-positive D entry");
  const double log_det = log_det_shape(params);
  if (!std::isfinite(log_det)) throw NumericalError("normalize_d: non-finite determinant");
  const double divisor = std::exp(log_det / (2.0 * static_cast<double>(params.dim())));
  for (double& di : params.d_diag) di /= divisor;
  return std::exp(log_det);
}

void update_sigma(DistributionParams& params, double g_sigma, double eta_sigma) {
  const double next = params.sigma * std::exp(eta_sigma / 2.0 * g_sigma);
  if (!std::isfinite(next) || !(next > 0.0)) throw NumericalError("update_sigma: sigma left (0, inf)");
  params.sigma = next;
}

}  // namespace crfmnes
