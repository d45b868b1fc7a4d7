#pragma once

// Natural gradients of ln p(x) with respect to v and the diagonal of D in
// O(d) per sample, via the s/t recursion. The Fisher matrix used is the
// block form with the v-D cross blocks scaled by alpha_vd, for which the
// Schur complement of the v-block is D^-1 (H + b vbb vbb^T) D^-1 with
// diagonal H. That rank-one-plus-diagonal system is what makes step 4 an
// O(d) Sherman-Morrison solve.

#include <cstddef>
#include <span>

#include "crfmnes/common.hpp"
#include "crfmnes/distribution.hpp"
#include "crfmnes/weights.hpp"

namespace crfmnes {

// Everything in the s/t recursion that depends on v only. Built once per
// generation and shared by all candidates.
struct StContext {
  double norm_v = 0.0;
  double norm_v2 = 0.0;
  double gamma_v = 1.0;   // 1 + ||v||^2
  double alpha_vd = 1.0;  // in (0, 1]
  double b = 0.0;
  double sm_denom = 1.0;  // 1 + b <vbb, H^-1 vbb>
  Vector vbar;            // v / ||v||
  Vector vbarbar;         // vbar * vbar
  Vector h_diag;          // 2 - (b + 2 alpha_vd^2) vbarbar
  Vector inv_h;
  Vector inv_h_vbb;       // H^-1 vbarbar
};

// Throws std::invalid_argument for ||v|| == 0 and NumericalError when
// ||v||^2 > 1e150, is non-finite, or H / the Sherman-Morrison denominator
// lose positivity.
StContext make_st_context(std::span<const double> v);

// s <- (H + b vbb vbb^T)^-1 s by Sherman-Morrison on the diagonal H.
void solve_schur(const StContext& ctx, std::span<double> s);

// Runs the five steps for one shaped sample y = D^-1 (x - m) / sigma.
// s and t must have length d.
void compute_st_from_y(const StContext& ctx, std::span<const double> y, std::span<double> s,
                       std::span<double> t);

struct StWorkspace {
  Vector s;
  Vector t;
  Vector vbar;
  Vector vbarbar;
  double gamma_v = 1.0;
  double alpha_vd = 1.0;
  double b = 0.0;
  Vector h_diag;
};

StWorkspace compute_st(std::span<const double> x, const DistributionParams& params);

struct NaturalGradient {
  Vector grad_v;      // sum_i w_i ||v||^-1 t_i
  Vector grad_d;      // sum_i w_i D s_i
  Vector rank_one_v;  // ||v||^-1 t at m + sigma p_c
  Vector rank_one_d;  // D s at m + sigma p_c
  double g_sigma = 0.0;
};

struct StScratch {
  Vector s;
  Vector t;
  Vector sum_s;
  Vector sum_t;
};

// Hot-path form. Uses the candidates' stored y (which equals
// D^-1 (x - m) / sigma by construction) and pc_y = p_c / D for the rank-one
// point. `out` and `scratch` are resized as needed and reused across calls.
void accumulate_natgrad(const Population& pop, const WeightSet& weights, const StContext& ctx,
                        std::span<const double> d_diag, std::span<const double> pc_y,
                        NaturalGradient& out, StScratch& scratch);

// Reference form: recomputes every y from x. pc_point = m + sigma * p_c.
// Throws std::logic_error if the population is unsorted.
NaturalGradient natgrad_vd(const Population& pop, const WeightSet& weights,
                           const DistributionParams& params, std::span<const double> pc_point);

// G_sigma = Tr(sum_i w_i (z_i z_i^T - I)) / d = sum_i w_i (||z_i||^2 - d) / d.
double grad_sigma(const Population& pop, const WeightSet& weights, std::size_t d);
double grad_sigma_from_sq_norms(std::span<const double> z_sq_norms, const WeightSet& weights,
                                std::size_t d);

}  // namespace crfmnes
