#include "crfmnes/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "crfmnes/kernels.hpp"

namespace crfmnes {

namespace {

void require_len(std::span<const double> v, std::size_t d, const char* what) {
  if (v.size() != d)
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(d) +
                                ", got " + std::to_string(v.size()));
}

void resize_candidate(Candidate& c, std::size_t d) {
  c.z.resize(d);
  c.y.resize(d);
  c.x.resize(d);
  c.fval = std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

DistributionParams init_params(std::size_t d, std::span<const double> m0, double sigma0,
                               std::span<const double> d0,
                               std::optional<std::span<const double>> v0, std::uint64_t seed) {
  if (d == 0) throw std::invalid_argument("init_params: dimension must be positive");
  require_len(m0, d, "init_params: m0");
  require_len(d0, d, "init_params: d0");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw std::invalid_argument("init_params: sigma0 must be positive and finite");
  for (double di : d0)
    if (!(di > 0.0) || !std::isfinite(di))
      throw std::invalid_argument("init_params: d0 entries must be positive and finite");

  DistributionParams p;
  p.m.assign(m0.begin(), m0.end());
  p.sigma = sigma0;
  p.d_diag.assign(d0.begin(), d0.end());
  if (v0) {
    require_len(*v0, d, "init_params: v0");
    p.v.assign(v0->begin(), v0->end());
  } else {
    Rng rng(seed, Rng::kInitStream);
    p.v.resize(d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& vi : p.v) vi = scale * rng.normal();
  }
  const double norm2 = kernels::sum_squares(p.v);
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw std::invalid_argument("init_params: v must be non-zero and finite");
  return p;
}

void transform_z_to_y(std::span<const double> z, std::span<const double> vbar, double coef,
                      std::span<double> y) {
  const double proj = kernels::dot(z, vbar);
  std::copy(z.begin(), z.end(), y.begin());
  kernels::axpy(coef * proj, vbar, y);
}

Vector transform_z_to_y(std::span<const double> z, std::span<const double> v) {
  if (z.size() != v.size()) throw std::invalid_argument("transform_z_to_y: length mismatch");
  const double norm2 = kernels::sum_squares(v);
  if (!(norm2 > 0.0)) throw std::invalid_argument("transform_z_to_y: v must be non-zero");
  const double norm = std::sqrt(norm2);
  Vector vbar(v.begin(), v.end());
  for (double& x : vbar) x /= norm;
  Vector y(z.size());
  transform_z_to_y(z, vbar, std::sqrt(1.0 + norm2) - 1.0, y);
  return y;
}

void sample_population(const DistributionParams& params, std::size_t lambda, Rng& rng,
                       Population& pop) {
  if (lambda == 0 || lambda % 2 != 0)
    throw std::invalid_argument("sample_population: lambda must be a positive even number");
  const std::size_t d = params.dim();
  const double norm2 = kernels::sum_squares(params.v);
  if (!(norm2 > 0.0)) throw std::invalid_argument("sample_population: v must be non-zero");
  const double norm = std::sqrt(norm2);
  const double coef = std::sqrt(1.0 + norm2) - 1.0;

  Vector vbar(d);
  for (std::size_t i = 0; i < d; ++i) vbar[i] = params.v[i] / norm;

  pop.candidates.resize(lambda);
  pop.sorted = false;
  for (std::size_t k = 0; k < lambda; k += 2) {
    Candidate& a = pop.candidates[k];
    Candidate& b = pop.candidates[k + 1];
    resize_candidate(a, d);
    resize_candidate(b, d);
    rng.fill_normal(a.z);
    for (std::size_t i = 0; i < d; ++i) b.z[i] = -a.z[i];
    transform_z_to_y(a.z, vbar, coef, a.y);
    transform_z_to_y(b.z, vbar, coef, b.y);
    kernels::affine_diag(params.m, params.sigma, params.d_diag, a.y, a.x);
    kernels::affine_diag(params.m, params.sigma, params.d_diag, b.y, b.x);
  }
}

Population sample_population(const DistributionParams& params, std::size_t lambda, Rng& rng) {
  Population pop;
  sample_population(params, lambda, rng, pop);
  return pop;
}

void sort_population(Population& pop) {
  std::stable_sort(pop.candidates.begin(), pop.candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.fval < b.fval; });
  pop.sorted = true;
}

DenseMatrix covariance_dense(const DistributionParams& params) {
  const std::size_t d = params.dim();
  DenseMatrix c(d);
  const double s2 = params.sigma * params.sigma;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double inner = (i == j ? 1.0 : 0.0) + params.v[i] * params.v[j];
      c(i, j) = s2 * ((params.d_diag[i] * params.d_diag[j]) * inner);
    }
  }
  return c;
}

double log_det_shape(const DistributionParams& params) {
  double acc = 0.0;
  for (double di : params.d_diag) acc += std::log(di);
  return 2.0 * acc + std::log1p(kernels::sum_squares(params.v));
}

}  // namespace crfmnes
