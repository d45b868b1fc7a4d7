#include "crfmnes/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crfmnes/kernels.hpp"

namespace crfmnes {

namespace {

void check_lambda(std::size_t lambda) {
  if (lambda < 2 || lambda % 2 != 0)
    throw std::invalid_argument("weights: lambda must be an even number >= 2");
}

WeightSet normalize(const Vector& raw, WeightKind kind) {
  double total = 0.0;
  for (double x : raw) total += x;
  const double inv_lambda = 1.0 / static_cast<double>(raw.size());
  WeightSet out;
  out.kind = kind;
  out.w.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.w[i] = raw[i] / total - inv_lambda;
  return out;
}

}  // namespace

Vector rank_weights_hat(std::size_t lambda) {
  check_lambda(lambda);
  Vector hat(lambda);
  const double top = std::log(static_cast<double>(lambda) / 2.0 + 1.0);
  for (std::size_t i = 0; i < lambda; ++i)
    hat[i] = std::max(0.0, top - std::log(static_cast<double>(i + 1)));
  return hat;
}

WeightSet rank_weights(std::size_t lambda) {
  return normalize(rank_weights_hat(lambda), WeightKind::rank);
}

double mu_eff(std::size_t lambda) {
  const WeightSet w = rank_weights(lambda);
  const double inv_lambda = 1.0 / static_cast<double>(lambda);
  double acc = 0.0;
  for (double wi : w.w) acc += (wi + inv_lambda) * (wi + inv_lambda);
  return 1.0 / acc;
}

WeightSet distance_weights_from_norms(std::span<const double> z_norms, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("distance_weights: alpha must be positive");
  const Vector hat = rank_weights_hat(z_norms.size());
  const double top = *std::max_element(z_norms.begin(), z_norms.end());
  Vector raw(hat.size());
  for (std::size_t i = 0; i < hat.size(); ++i)
    raw[i] = hat[i] * std::exp(alpha * (z_norms[i] - top));
  return normalize(raw, WeightKind::distance);
}

WeightSet distance_weights(std::span<const Vector> z_sorted, double alpha) {
  Vector norms(z_sorted.size());
  for (std::size_t i = 0; i < z_sorted.size(); ++i)
    norms[i] = std::sqrt(kernels::sum_squares(z_sorted[i]));
  return distance_weights_from_norms(norms, alpha);
}

double h_inv(std::size_t d) {
  // Newton on the log of the defining equation,
  //   g(x) = ln(1 + x^2) + x^2/2 - ln(0.24 (10 + d)),
  // which shares the root, is increasing and convex for x > 0, and does not
  // overflow for large d.
  const double dd = static_cast<double>(d);
  const double target = std::log(0.24 * (10.0 + dd));
  auto residual = [dd](double x) {
    return (1.0 + x * x) * std::exp(x * x / 2.0) / 0.24 - 10.0 - dd;
  };
  auto newton_step = [target](double x) {
    const double g = std::log1p(x * x) + x * x / 2.0 - target;
    return g / (2.0 * x / (1.0 + x * x) + x);
  };
  double x = 1.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double step = newton_step(x);
    x -= step;
    if (std::abs(step) <= 4e-16 * x) return x;
    // One more step once the residual is small takes x to full precision.
    if (std::abs(residual(x)) < 1e-10) return x - newton_step(x);
  }
  throw std::runtime_error("h_inv: Newton iteration did not converge");
}

double alpha_dist(std::size_t d, std::size_t lambda) {
  const double ratio = static_cast<double>(lambda) / static_cast<double>(d);
  return h_inv(d) * std::min(1.0, std::sqrt(ratio));
}

WeightConstants weight_constants(std::size_t d, std::size_t lambda) {
  return {mu_eff(lambda), alpha_dist(d, lambda)};
}

}  // namespace crfmnes
