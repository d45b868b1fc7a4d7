#include "crfmnes/natgrad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crfmnes/kernels.hpp"

namespace crfmnes {

namespace {

constexpr double kMaxVNorm2 = 1e150;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericalError(std::string("natgrad: non-finite ") + what);
}

void shaped_sample(std::span<const double> x, const DistributionParams& params,
                   std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = (x[i] - params.m[i]) / params.d_diag[i] / params.sigma;
}

}  // namespace

StContext make_st_context(std::span<const double> v) {
  const double n2 = kernels::sum_squares(v);
  if (n2 == 0.0) throw std::invalid_argument("natgrad: v must be non-zero");
  if (!std::isfinite(n2) || n2 > kMaxVNorm2) throw NumericalError("natgrad: ||v||^2 overflow");

  const std::size_t d = v.size();
  StContext ctx;
  ctx.norm_v2 = n2;
  ctx.norm_v = std::sqrt(n2);
  ctx.gamma_v = 1.0 + n2;
  ctx.vbar.resize(d);
  ctx.vbarbar.resize(d);
  std::size_t arg_max = 0;
  for (std::size_t i = 0; i < d; ++i) {
    ctx.vbar[i] = v[i] / ctx.norm_v;
    ctx.vbarbar[i] = ctx.vbar[i] * ctx.vbar[i];
    if (ctx.vbarbar[i] > ctx.vbarbar[arg_max]) arg_max = i;
  }
  const double max_vbb = ctx.vbarbar[arg_max];

  const double n4 = n2 * n2;
  const double q = (2.0 + n2) * (2.0 + n2);
  const double gamma_vd = 1.0 / std::sqrt(ctx.gamma_v);
  const double c = (2.0 - gamma_vd) * ctx.gamma_v / max_vbb;
  // 1 - alpha^2 without forming alpha^2 first; q - n4 = 4 + 4 n2.
  const double one_minus_a2 = (4.0 + 4.0 * n2 - c) / q;

  ctx.h_diag.resize(d);
  ctx.inv_h.resize(d);
  ctx.inv_h_vbb.resize(d);
  if (one_minus_a2 > 0.0) {
    const double a2 = (n4 + c) / q;
    ctx.alpha_vd = std::sqrt(a2);
    // With the clamp active, b and H reduce to forms that avoid the
    // O(||v||^2) cancellation of the textbook expressions:
    //   b = (2 n4 (1 - M) - g n4 + (2 - g)(2 + 2 n2)) / (M q)
    //   H_i = (2 (M - vbb_i) + g vbb_i) / M,     g = gamma_vd, M = max vbb
    // so min H = gamma_vd > 0.
    double rest = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      if (i != arg_max) rest += ctx.vbarbar[i];
    ctx.b = (2.0 * n4 * rest - gamma_vd * n4 + (2.0 - gamma_vd) * (2.0 + 2.0 * n2)) /
            (max_vbb * q);
    for (std::size_t i = 0; i < d; ++i)
      ctx.h_diag[i] =
          (2.0 * (max_vbb - ctx.vbarbar[i]) + gamma_vd * ctx.vbarbar[i]) / max_vbb;
  } else {
    ctx.alpha_vd = 1.0;
    ctx.b = 2.0;
    for (std::size_t i = 0; i < d; ++i) ctx.h_diag[i] = 2.0 - 4.0 * ctx.vbarbar[i];
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!(ctx.h_diag[i] > 0.0)) throw NumericalError("natgrad: H lost positivity");
    ctx.inv_h[i] = 1.0 / ctx.h_diag[i];
    ctx.inv_h_vbb[i] = ctx.inv_h[i] * ctx.vbarbar[i];
  }
  ctx.sm_denom = 1.0 + ctx.b * kernels::dot(ctx.vbarbar, ctx.inv_h_vbb);
  if (!(ctx.sm_denom > 0.0)) throw NumericalError("natgrad: singular rank-one correction");
  require_finite(ctx.b, "b");
  return ctx;
}

void solve_schur(const StContext& ctx, std::span<double> s) {
  const kernels::KernelTable& k = kernels::active();
  const double ip_s = k.dot(s, ctx.inv_h_vbb);
  k.diag_solve(ctx.inv_h, ctx.inv_h_vbb, ctx.b * ip_s / ctx.sm_denom, s);
}

void compute_st_from_y(const StContext& ctx, std::span<const double> y, std::span<double> s,
                       std::span<double> t) {
  const kernels::KernelTable& k = kernels::active();
  const double n2 = ctx.norm_v2;
  const double g = ctx.gamma_v;
  const double alpha = ctx.alpha_vd;

  // 1-2
  const double ip_yv = k.dot(y, ctx.vbar);
  k.st_seed(y, ctx.vbar, n2 * ip_yv / g, ip_yv, 0.5 * (ip_yv * ip_yv + g), s, t);

  // 3
  const double ip_vt = k.dot(ctx.vbar, t);
  k.s_correct(ctx.vbar, t, ctx.vbarbar, alpha * (2.0 + n2) / g, alpha * n2 * ip_vt / g, s);

  // 4
  solve_schur(ctx, s);

  // 5
  const double ip_svv = k.dot(s, ctx.vbarbar);
  k.t_correct(ctx.vbar, s, alpha * (2.0 + n2), alpha * ip_svv, t);
}

StWorkspace compute_st(std::span<const double> x, const DistributionParams& params) {
  const std::size_t d = params.dim();
  if (x.size() != d) throw std::invalid_argument("compute_st: length mismatch");
  StContext ctx = make_st_context(params.v);
  Vector y(d);
  shaped_sample(x, params, y);

  StWorkspace ws;
  ws.s.resize(d);
  ws.t.resize(d);
  compute_st_from_y(ctx, y, ws.s, ws.t);
  for (std::size_t i = 0; i < d; ++i) {
    require_finite(ws.s[i], "s");
    require_finite(ws.t[i], "t");
  }
  ws.vbar = std::move(ctx.vbar);
  ws.vbarbar = std::move(ctx.vbarbar);
  ws.gamma_v = ctx.gamma_v;
  ws.alpha_vd = ctx.alpha_vd;
  ws.b = ctx.b;
  ws.h_diag = std::move(ctx.h_diag);
  return ws;
}

void accumulate_natgrad(const Population& pop, const WeightSet& weights, const StContext& ctx,
                        std::span<const double> d_diag, std::span<const double> pc_y,
                        NaturalGradient& out, StScratch& scratch) {
  if (!pop.sorted) throw std::logic_error("natgrad: population must be sorted");
  if (weights.size() != pop.size()) throw std::invalid_argument("natgrad: weight count mismatch");
  const std::size_t d = d_diag.size();
  scratch.s.resize(d);
  scratch.t.resize(d);
  scratch.sum_s.assign(d, 0.0);
  scratch.sum_t.assign(d, 0.0);

  for (std::size_t i = 0; i < pop.size(); ++i) {
    compute_st_from_y(ctx, pop.candidates[i].y, scratch.s, scratch.t);
    kernels::axpy(weights[i], scratch.s, scratch.sum_s);
    kernels::axpy(weights[i], scratch.t, scratch.sum_t);
  }

  out.grad_v.resize(d);
  out.grad_d.resize(d);
  out.rank_one_v.resize(d);
  out.rank_one_d.resize(d);
  const double inv_norm = 1.0 / ctx.norm_v;
  for (std::size_t j = 0; j < d; ++j) {
    out.grad_v[j] = scratch.sum_t[j] * inv_norm;
    out.grad_d[j] = d_diag[j] * scratch.sum_s[j];
  }

  compute_st_from_y(ctx, pc_y, scratch.s, scratch.t);
  for (std::size_t j = 0; j < d; ++j) {
    out.rank_one_v[j] = scratch.t[j] * inv_norm;
    out.rank_one_d[j] = d_diag[j] * scratch.s[j];
  }

  for (std::size_t j = 0; j < d; ++j) {
    if (!std::isfinite(out.grad_v[j]) || !std::isfinite(out.grad_d[j]) ||
        !std::isfinite(out.rank_one_v[j]) || !std::isfinite(out.rank_one_d[j]))
      throw NumericalError("natgrad: non-finite natural gradient");
  }
}

NaturalGradient natgrad_vd(const Population& pop, const WeightSet& weights,
                           const DistributionParams& params, std::span<const double> pc_point) {
  if (!pop.sorted) throw std::logic_error("natgrad: population must be sorted");
  const std::size_t d = params.dim();
  if (pc_point.size() != d) throw std::invalid_argument("natgrad: pc_point length mismatch");

  // Rebuild a population whose y comes from x, so this path never trusts the
  // stored shaping.
  Population shaped;
  shaped.sorted = true;
  shaped.candidates.resize(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    shaped.candidates[i].y.resize(d);
    shaped_sample(pop.candidates[i].x, params, shaped.candidates[i].y);
  }
  Vector pc_y(d);
  shaped_sample(pc_point, params, pc_y);

  NaturalGradient out;
  StScratch scratch;
  accumulate_natgrad(shaped, weights, make_st_context(params.v), params.d_diag, pc_y, out,
                     scratch);
  out.g_sigma = grad_sigma(pop, weights, d);
  return out;
}

double grad_sigma_from_sq_norms(std::span<const double> z_sq_norms, const WeightSet& weights,
                                std::size_t d) {
  const double dd = static_cast<double>(d);
  double acc = 0.0;
  for (std::size_t i = 0; i < z_sq_norms.size(); ++i) acc += weights[i] * (z_sq_norms[i] - dd);
  return acc / dd;
}

double grad_sigma(const Population& pop, const WeightSet& weights, std::size_t d) {
  Vector sq(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) sq[i] = kernels::sum_squares(pop.candidates[i].z);
  return grad_sigma_from_sq_norms(sq, weights, d);
}

}  // namespace crfmnes
