#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "crfmnes/distribution.hpp"

namespace testsupport {

// Random well-conditioned parameters: |v| in [0.3, 3], D in [e^-1, e], sigma in [e^-1, e].
inline crfmnes::DistributionParams random_params(std::size_t d, std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  crfmnes::DistributionParams p;
  p.m.resize(d);
  p.d_diag.resize(d);
  p.v.resize(d);
  for (auto& x : p.m) x = n01(gen);
  for (auto& x : p.d_diag) x = std::exp(u(gen));
  double n2 = 0.0;
  for (auto& x : p.v) {
    x = n01(gen);
    n2 += x * x;
  }
  const double target = 0.3 * std::pow(10.0, (u(gen) + 1.0) / 2.0);
  for (auto& x : p.v) x *= target / std::sqrt(n2);
  p.sigma = std::exp(u(gen));
  return p;
}

// x = m + sigma D y with y ~ N(0, I + v v^T).
inline crfmnes::Vector random_point(const crfmnes::DistributionParams& p, std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  crfmnes::Vector z(p.dim());
  for (auto& x : z) x = n01(gen);
  const auto y = crfmnes::transform_z_to_y(z, p.v);
  crfmnes::Vector x(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) x[i] = p.m[i] + p.sigma * p.d_diag[i] * y[i];
  return x;
}

inline double max_abs(const crfmnes::Vector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace testsupport
