#pragma once

// Ask/tell optimizer.
//
//   crfmnes::StrategyConfig cfg;
//   cfg.dim = 40;
//   cfg.init.m.assign(40, 3.0);
//   cfg.init.sigma = 2.0;
//   crfmnes::Optimizer opt(cfg);
//   while (...) {
//     auto xs = opt.ask();
//     std::vector<double> f(xs.size());
//     for (size_t i = 0; i < xs.size(); ++i) f[i] = objective(xs[i]);
//     opt.tell(f);
//   }
//
// One instance is single-threaded. The spans returned by ask() stay valid
// until the matching tell(), so callers may evaluate them concurrently.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "crfmnes/adaptation.hpp"
#include "crfmnes/common.hpp"
#include "crfmnes/distribution.hpp"
#include "crfmnes/natgrad.hpp"
#include "crfmnes/rng.hpp"
#include "crfmnes/weights.hpp"

namespace crfmnes {

struct InitialDistribution {
  Vector m;
  double sigma = 1.0;
  Vector d_diag;             // empty selects the identity
  std::optional<Vector> v;   // empty draws N(0, 1/d) entries
};

struct StrategyConfig {
  std::size_t dim = 0;
  std::size_t lambda = 0;        // 0 selects default_lambda(dim)
  InitialDistribution init;
  double target_fval = 1e-10;
  std::uint64_t max_evals = 0;   // 0 selects default_budget(dim)
  std::uint64_t seed = 0;
};

enum class TerminationReason { target, budget, numerical };

std::string_view to_string(TerminationReason reason);

struct OptimizeResult {
  Vector best_x;
  double best_fval = std::numeric_limits<double>::infinity();
  std::uint64_t evals_used = 0;
  std::uint64_t generations = 0;
  bool reached_target = false;
  TerminationReason termination_reason = TerminationReason::budget;
};

struct StateSnapshot {
  DistributionParams params;
  EvolutionState evolution;
  std::uint64_t evals_used = 0;
  double best_fval = std::numeric_limits<double>::infinity();
  std::size_t d_clamps = 0;
  std::size_t v_rescales = 0;
};

using Objective = std::function<double(std::span<const double>)>;

// 4 + floor(3 ln d), bumped to the next even number.
std::size_t default_lambda(std::size_t d);

// 5 d * 10^4 evaluations.
std::uint64_t default_budget(std::size_t d);

class Optimizer {
 public:
  // Throws std::invalid_argument for an invalid configuration.
  explicit Optimizer(StrategyConfig config);

  // Samples a new generation. Throws std::logic_error if the previous
  // generation has not been told.
  std::vector<std::span<const double>> ask();

  // Consumes objective values in the order ask() returned the points.
  // Throws std::logic_error without a pending ask, std::invalid_argument on a
  // length mismatch or a non-finite value (the generation stays pending), and
  // NumericalError if the state update breaks down.
  void tell(std::span<const double> fvals);

  // Runs ask/evaluate/tell until the target, the budget, or a numerical
  // failure. The target is checked before the budget.
  OptimizeResult optimize(const Objective& f);

  StateSnapshot snapshot() const;

  const StrategyConfig& config() const { return config_; }
  const DistributionParams& params() const { return params_; }
  const EvolutionState& evolution() const { return evo_; }
  const LearningRates& rates() const { return rates_; }
  const Population& population() const { return pop_; }
  std::size_t lambda() const { return config_.lambda; }
  std::uint64_t evals_used() const { return evals_; }
  double best_fval() const { return best_f_; }
  const Vector& best_x() const { return best_x_; }

  // True once sigma left [1e-300, 1e100] or tell() raised NumericalError.
  bool numerically_failed() const;

 private:
  StrategyConfig config_;
  DistributionParams params_;
  EvolutionState evo_;
  LearningRates rates_;
  WeightSet rank_weights_;
  double mu_eff_ = 1.0;
  double alpha_dist_ = 1.0;
  double upsilon_ = 1.0;
  Rng rng_;

  Population pop_;
  bool pending_ = false;
  bool failed_ = false;
  std::uint64_t evals_ = 0;
  double best_f_ = std::numeric_limits<double>::infinity();
  Vector best_x_;
  std::size_t d_clamps_ = 0;
  std::size_t v_rescales_ = 0;

  Vector z_sq_;
  Vector z_norm_;
  Vector pc_y_;
  NaturalGradient grad_;
  StScratch scratch_;
};

// Constructs an optimizer from `config` and runs it.
OptimizeResult optimize(const Objective& f, const StrategyConfig& config);

}  // namespace crfmnes
