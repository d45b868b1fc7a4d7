#pragma once

// Restricted-covariance search distribution
//
//   x ~ N(m, sigma^2 D (I + v v^T) D),   D = diag(d_diag)
//
// and antithetic population sampling in O(d * lambda).

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "crfmnes/common.hpp"
#include "crfmnes/rng.hpp"

namespace crfmnes {

struct DistributionParams {
  Vector m;
  double sigma = 1.0;
  Vector d_diag;
  Vector v;

  std::size_t dim() const { return m.size(); }
};

struct Candidate {
  Vector z;  // standard normal draw
  Vector y;  // z after the rank-one shaping
  Vector x;  // m + sigma * D * y
  double fval = std::numeric_limits<double>::quiet_NaN();
};

struct Population {
  std::vector<Candidate> candidates;
  bool sorted = false;

  std::size_t size() const { return candidates.size(); }
};

// Dense row-major square matrix. Only produced by test helpers.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Smallest ||v|| the strategy lets v shrink to.
inline constexpr double kMinVNorm = 1e-8;

// Builds validated initial parameters. When v0 is absent, v is drawn with
// i.i.d. N(0, 1/d) entries from Rng(seed, Rng::kInitStream).
// Throws std::invalid_argument on length mismatch, sigma0 <= 0, a
// non-positive d0 entry or ||v|| == 0.
DistributionParams init_params(std::size_t d, std::span<const double> m0, double sigma0,
                               std::span<const double> d0,
                               std::optional<std::span<const double>> v0, std::uint64_t seed);

// y = z + (sqrt(1 + ||v||^2) - 1) <z, vbar> vbar. Throws on ||v|| == 0.
Vector transform_z_to_y(std::span<const double> z, std::span<const double> v);

// Precomputed form used on the hot path: vbar = v/||v||, coef = sqrt(1+||v||^2)-1.
void transform_z_to_y(std::span<const double> z, std::span<const double> vbar, double coef,
                      std::span<double> y);

// Fills `pop` with lambda antithetic candidates (z_{2i} = -z_{2i-1}),
// reusing its storage. Throws std::invalid_argument if lambda is odd or 0.
void sample_population(const DistributionParams& params, std::size_t lambda, Rng& rng,
                       Population& pop);
Population sample_population(const DistributionParams& params, std::size_t lambda, Rng& rng);

// Stable sort by fval; sets pop.sorted.
void sort_population(Population& pop);

// sigma^2 D (I + v v^T) D as a dense matrix; test/oracle helper.
DenseMatrix covariance_dense(const DistributionParams& params);

// ln det(D (I + v v^T) D) = 2 sum ln D_i + ln(1 + ||v||^2), O(d).
double log_det_shape(const DistributionParams& params);

}  // namespace crfmnes
