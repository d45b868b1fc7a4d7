#include "crfmnes/strategy.hpp"

#include <cmath>
#include <stdexcept>

#include "crfmnes/kernels.hpp"

namespace crfmnes {

namespace {

constexpr double kSigmaMax = 1e100;
constexpr double kSigmaMin = 1e-300;

StrategyConfig resolve(StrategyConfig cfg) {
  if (cfg.dim == 0) throw std::invalid_argument("StrategyConfig: dim must be positive");
  if (cfg.lambda == 0) cfg.lambda = default_lambda(cfg.dim);
  if (cfg.lambda < 2 || cfg.lambda % 2 != 0)
    throw std::invalid_argument("StrategyConfig: lambda must be an even number >= 2");
  if (cfg.max_evals == 0) cfg.max_evals = default_budget(cfg.dim);
  if (cfg.max_evals < cfg.lambda)
    throw std::invalid_argument("StrategyConfig: max_evals must be at least lambda");
  if (cfg.init.d_diag.empty()) cfg.init.d_diag.assign(cfg.dim, 1.0);
  return cfg;
}

DistributionParams initial_params(const StrategyConfig& cfg) {
  std::optional<std::span<const double>> v0;
  if (cfg.init.v) v0 = std::span<const double>(*cfg.init.v);
  return init_params(cfg.dim, cfg.init.m, cfg.init.sigma, cfg.init.d_diag, v0, cfg.seed);
}

}  // namespace

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::target:
      return "target";
    case TerminationReason::budget:
      return "budget";
    case TerminationReason::numerical:
      return "numerical";
  }
  return "unknown";
}

std::size_t default_lambda(std::size_t d) {
  const auto base = static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(d))));
  return base % 2 == 0 ? 4 + base : 5 + base;
}

std::uint64_t default_budget(std::size_t d) { return 5ULL * d * 10000ULL; }

Optimizer::Optimizer(StrategyConfig config)
    : config_(resolve(std::move(config))),
      params_(initial_params(config_)),
      evo_(EvolutionState::zeros(config_.dim)),
      rates_(learning_rates(config_.dim, config_.lambda)),
      rank_weights_(rank_weights(config_.lambda)),
      mu_eff_(mu_eff(config_.lambda)),
      alpha_dist_(alpha_dist(config_.dim, config_.lambda)),
      upsilon_(expected_norm(config_.dim)),
      rng_(config_.seed, Rng::kSamplingStream),
      z_sq_(config_.lambda),
      z_norm_(config_.lambda),
      pc_y_(config_.dim) {}

std::vector<std::span<const double>> Optimizer::ask() {
  if (pending_) throw std::logic_error("Optimizer::ask: previous generation was not told");
  sample_population(params_, config_.lambda, rng_, pop_);
  pending_ = true;
  std::vector<std::span<const double>> xs;
  xs.reserve(pop_.size());
  for (const Candidate& c : pop_.candidates) xs.emplace_back(c.x);
  return xs;
}

void Optimizer::tell(std::span<const double> fvals) {
  if (!pending_) throw std::logic_error("Optimizer::tell: no pending ask");
  if (fvals.size() != pop_.size())
    throw std::invalid_argument("Optimizer::tell: expected " + std::to_string(pop_.size()) +
                                " values, got " + std::to_string(fvals.size()));
  for (double f : fvals)
    if (!std::isfinite(f)) throw std::invalid_argument("Optimizer::tell: non-finite objective value");

  pending_ = false;
  evals_ += pop_.size();
  for (std::size_t i = 0; i < pop_.size(); ++i) {
    Candidate& c = pop_.candidates[i];
    c.fval = fvals[i];
    if (c.fval < best_f_) {
      best_f_ = c.fval;
      best_x_ = c.x;
    }
  }

  try {
    const std::size_t d = config_.dim;
    sort_population(pop_);
    for (std::size_t i = 0; i < pop_.size(); ++i) {
      z_sq_[i] = kernels::sum_squares(pop_.candidates[i].z);
      z_norm_[i] = std::sqrt(z_sq_[i]);
    }

    update_p_sigma(evo_, pop_, rank_weights_, rates_.c_sigma, mu_eff_);
    const double ps_norm = std::sqrt(kernels::sum_squares(evo_.p_sigma));
    evo_.phase = detect_phase(ps_norm, upsilon_);

    WeightSet dist;
    if (evo_.phase == Phase::movement) dist = distance_weights_from_norms(z_norm_, alpha_dist_);
    const WeightSet& w = evo_.phase == Phase::movement ? dist : rank_weights_;
    const double eta_sigma = rates_.eta_sigma(evo_.phase);

    const Vector step = weighted_step(pop_, w, params_);
    update_p_c(evo_, step, params_.sigma, rates_.c_c, mu_eff_);

    // Natural gradients at the pre-update parameters; the rank-one point is
    // m + sigma p_c, i.e. y = p_c / D.
    const StContext ctx = make_st_context(params_.v);
    for (std::size_t j = 0; j < d; ++j) pc_y_[j] = evo_.p_c[j] / params_.d_diag[j];
    accumulate_natgrad(pop_, w, ctx, params_.d_diag, pc_y_, grad_, scratch_);
    grad_.g_sigma = grad_sigma_from_sq_norms(z_sq_, w, d);

    update_mean(params_, step, rates_.eta_m);
    const VdUpdateReport report = update_v_d(params_, grad_, rates_.eta_b, rates_.c1);
    d_clamps_ += report.d_clamps;
    v_rescales_ += report.v_rescaled ? 1 : 0;
    normalize_d(params_);
    update_sigma(params_, grad_.g_sigma, eta_sigma);
    ++evo_.t;
  } catch (const NumericalError&) {
    failed_ = true;
    throw;
  }
}

bool Optimizer::numerically_failed() const {
  return failed_ || !(params_.sigma <= kSigmaMax) || !(params_.sigma >= kSigmaMin);
}

OptimizeResult Optimizer::optimize(const Objective& f) {
  OptimizeResult result;
  Vector fvals(config_.lambda);
  const std::uint64_t start_t = evo_.t;
  for (;;) {
    if (evals_ + config_.lambda > config_.max_evals) {
      result.termination_reason = TerminationReason::budget;
      break;
    }
    const auto xs = ask();
    for (std::size_t i = 0; i < xs.size(); ++i) fvals[i] = f(xs[i]);
    try {
      tell(fvals);
    } catch (const NumericalError&) {
      result.termination_reason = TerminationReason::numerical;
      break;
    }
    if (best_f_ <= config_.target_fval) {
      result.termination_reason = TerminationReason::target;
      break;
    }
    if (numerically_failed()) {
      result.termination_reason = TerminationReason::numerical;
      break;
    }
  }
  result.best_x = best_x_;
  result.best_fval = best_f_;
  result.evals_used = evals_;
  result.generations = evo_.t - start_t;
  result.reached_target = best_f_ <= config_.target_fval;
  if (result.reached_target) result.termination_reason = TerminationReason::target;
  return result;
}

StateSnapshot Optimizer::snapshot() const {
  return {params_, evo_, evals_, best_f_, d_clamps_, v_rescales_};
}

OptimizeResult optimize(const Objective& f, const StrategyConfig& config) {
  Optimizer opt(config);
  return opt.optimize(f);
}

}  // namespace crfmnes
