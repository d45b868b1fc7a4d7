#pragma once

// Multi-trial experiment runner and its outputs.
//
// A trial counts as successful when the best evaluated point reaches the
// target within the evaluation budget. Per population size the reported
// metric is
//
//   sp_metric = (mean evaluations over successful trials) / success_rate
//
// and is absent when no trial succeeded.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crfmnes/benchmarks.hpp"

namespace crfmnes::harness {

struct ExperimentGrid {
  bench::Function function = bench::Function::sphere;
  std::size_t d = 0;
  std::vector<std::size_t> lambdas;
  std::size_t trials = 10;
  double target_fval = 1e-10;
  std::uint64_t max_evals = 0;  // 0 selects 5 d * 10^4
  std::uint64_t base_seed = 0;
};

struct RunRecord {
  std::size_t lambda = 0;
  std::size_t trial = 0;
  std::uint64_t evals_used = 0;
  double best_fval = 0.0;
  bool success = false;
  double wall_seconds = 0.0;
};

struct MetricRow {
  std::string function;
  std::size_t d = 0;
  std::size_t lambda = 0;
  std::size_t trials = 0;
  double success_rate = 0.0;
  std::optional<double> mean_evals_success;
  std::optional<double> sp_metric;
};

struct RunOptions {
  // When set, every finished run is appended here immediately, and runs
  // already present for the same function/d are not repeated.
  std::filesystem::path records_path;
  unsigned jobs = 1;
  std::function<void(const RunRecord&)> on_record;
};

// {1, 2, 3, 4, 5} x default_lambda(d), or the Rastrigin table.
std::vector<std::size_t> auto_lambdas(bench::Function f, std::size_t d);

// Checks trials >= 1, d >= 1, a non-empty even lambda list. Throws
// std::invalid_argument.
void validate(const ExperimentGrid& grid);

RunRecord run_trial(const ExperimentGrid& grid, std::size_t lambda, std::size_t trial);

// trials x |lambdas| records ordered by (lambda as listed, trial). Trial k
// uses seed base_seed + k. Throws std::runtime_error on I/O failure.
std::vector<RunRecord> run_experiment(const ExperimentGrid& grid, const RunOptions& options = {});

// One row per distinct lambda, in first-appearance order.
std::vector<MetricRow> success_metric(std::string_view function, std::size_t d,
                                      std::span<const RunRecord> records);

inline constexpr std::string_view kMetricsHeader =
    "function,d,lambda,trials,success_rate,mean_evals_success,sp_metric";
inline constexpr std::string_view kRecordsHeader =
    "function,d,lambda,trial,seed,evals_used,best_fval,success,wall_seconds";

void write_csv(std::span<const MetricRow> rows, const std::filesystem::path& path);
std::vector<MetricRow> read_csv(const std::filesystem::path& path);

// Record file used for resuming. read_records ignores a truncated last line.
std::vector<RunRecord> read_records(const std::filesystem::path& path, std::string_view function,
                                    std::size_t d);

// Locale-independent shortest round-trip formatting.
std::string format_double(double x);
double parse_double(std::string_view s);

// SVG with lambda on x and sp_metric on a log y axis. Rows without a metric
// are drawn as failure markers. Throws std::invalid_argument for no rows.
std::string render_svg(std::span<const MetricRow> rows);
void emit_plot(std::span<const MetricRow> rows, const std::filesystem::path& path);

struct TimingRow {
  std::size_t d = 0;
  std::size_t lambda = 0;
  std::size_t iterations = 0;
  std::size_t repeats = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
};

// Wall time of `iterations` ask/tell cycles against a constant objective,
// so only strategy overhead is measured.
std::vector<TimingRow> timing_bench(std::span<const std::size_t> dims, std::size_t lambda,
                                    std::size_t iterations, std::size_t repeats);
void write_timing_csv(std::span<const TimingRow> rows, const std::filesystem::path& path);

}  // namespace crfmnes::harness
