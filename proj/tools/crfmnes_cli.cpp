// crfmnes: experiment runner.
//
//   crfmnes run  --function sphere --dim 40 --lambdas auto --trials 10 --out results/
//   crfmnes time --dims 10:100:10 --lambda 20 --iters 1000 --repeats 30 --out timing.csv
//   crfmnes plot --in results/metrics.csv --out results/metrics.svg
//
// CRFMNES_OUT_DIR overrides the --out directory of `run`. `--config FILE`
// reads flat key=value lines; keys are option names without dashes and
// anything given on the command line wins.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crfmnes/harness.hpp"
#include "crfmnes/kernels.hpp"
#include "crfmnes/strategy.hpp"

namespace fs = std::filesystem;
using namespace crfmnes;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Inserts --key value pairs from a config file after the subcommand name,
// skipping keys already present on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config;
  for (std::size_t i = 1; i + 1 < args.size(); ++i)
    if (args[i] == "--config") config = args[i + 1];
  if (config.empty()) return args;

  std::ifstream in(config);
  if (!in) throw std::runtime_error("cannot read config file " + config);
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config: expected key=value: " + line);
    const std::string key = "--" + trim(line.substr(0, eq));
    if (std::find(args.begin(), args.end(), key) != args.end()) continue;
    extra.push_back(key);
    extra.push_back(trim(line.substr(eq + 1)));
  }
  const std::size_t insert_at = args.size() > 1 ? 2 : 1;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), extra.begin(), extra.end());
  return args;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

// "lo:hi:step" or a comma list.
std::vector<std::size_t> parse_dims(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_size_list(text);
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(static_cast<std::size_t>(std::stoull(item)));
  if (parts.size() != 3 || parts[2] == 0 || parts[0] > parts[1])
    throw std::invalid_argument("--dims expects lo:hi:step");
  std::vector<std::size_t> out;
  for (std::size_t d = parts[0]; d <= parts[1]; d += parts[2]) out.push_back(d);
  return out;
}

void print_rows(const std::vector<harness::MetricRow>& rows) {
  std::printf("%8s %7s %12s %14s\n", "lambda", "rate", "mean_evals", "sp_metric");
  for (const auto& r : rows) {
    std::printf("%8zu %7.2f %12s %14s\n", r.lambda, r.success_rate,
                r.mean_evals_success ? harness::format_double(*r.mean_evals_success).c_str() : "-",
                r.sp_metric ? harness::format_double(*r.sp_metric).c_str() : "fail");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CR-FM-NES experiment runner"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "flat key=value file with option defaults");

  // run
  auto* run = app.add_subcommand("run", "multi-trial benchmark experiment");
  std::string function_name;
  std::size_t dim = 0;
  std::string lambdas_text = "auto";
  std::size_t trials = 0;
  double target = 1e-10;
  std::string max_evals_text = "auto";
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  unsigned jobs = 1;
  run->add_option("--function", function_name, "sphere|ktablet|ellipsoid|rosenbrock|rastrigin")
      ->required();
  run->add_option("--dim", dim, "dimension")->required()->check(CLI::PositiveNumber);
  run->add_option("--lambdas", lambdas_text, "comma list of even population sizes, or auto");
  run->add_option("--trials", trials, "trials per population size (default 10; 30 for rastrigin)");
  run->add_option("--target", target, "target objective value");
  run->add_option("--max-evals", max_evals_text, "evaluation budget per trial, or auto (5d*1e4)");
  run->add_option("--seed", seed, "base seed; trial k uses seed + k");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "concurrent trials")->check(CLI::PositiveNumber);

  // time
  auto* time_cmd = app.add_subcommand("time", "per-iteration overhead vs. dimension");
  std::string dims_text = "10:100:10";
  std::size_t time_lambda = 20;
  std::size_t iters = 1000;
  std::size_t repeats = 30;
  std::string time_out = "timing.csv";
  time_cmd->add_option("--dims", dims_text, "lo:hi:step or comma list");
  time_cmd->add_option("--lambda", time_lambda, "population size");
  time_cmd->add_option("--iters", iters, "iterations per measurement");
  time_cmd->add_option("--repeats", repeats, "measurements per dimension");
  time_cmd->add_option("--out", time_out, "output CSV");

  // plot
  auto* plot = app.add_subcommand("plot", "render a metrics CSV as SVG");
  std::string plot_in;
  std::string plot_out;
  plot->add_option("--in", plot_in, "metrics CSV")->required();
  plot->add_option("--out", plot_out, "output SVG")->required();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      const auto fn = bench::parse_function(function_name);
      if (!fn) throw std::invalid_argument("unknown function '" + function_name + "'");
      harness::ExperimentGrid grid;
      grid.function = *fn;
      grid.d = dim;
      grid.lambdas = lambdas_text == "auto" ? harness::auto_lambdas(*fn, dim)
                                            : parse_size_list(lambdas_text);
      grid.trials = trials != 0 ? trials : (*fn == bench::Function::rastrigin ? 30 : 10);
      grid.target_fval = target;
      grid.max_evals = max_evals_text == "auto" ? default_budget(dim) : std::stoull(max_evals_text);
      grid.base_seed = seed;
      if (const char* env = std::getenv("CRFMNES_OUT_DIR"); env != nullptr && *env != '\0')
        out_dir = env;

      const fs::path dir(out_dir);
      harness::RunOptions options;
      options.records_path = dir / "runs.csv";
      options.jobs = jobs;
      options.on_record = [](const harness::RunRecord& r) {
        std::fprintf(stderr, "lambda=%zu trial=%zu evals=%llu best=%.3e %s\n", r.lambda, r.trial,
                     static_cast<unsigned long long>(r.evals_used), r.best_fval,
                     r.success ? "ok" : "fail");
      };
      std::fprintf(stderr, "kernels: %s\n", kernels::active().name);
      const auto records = harness::run_experiment(grid, options);
      const auto rows =
          harness::success_metric(bench::to_string(grid.function), grid.d, records);
      harness::write_csv(rows, dir / "metrics.csv");
      harness::emit_plot(rows, dir / "metrics.svg");
      print_rows(rows);
      return 0;
    }
    if (*time_cmd) {
      const auto dims = parse_dims(dims_text);
      const auto rows = harness::timing_bench(dims, time_lambda, iters, repeats);
      harness::write_timing_csv(rows, time_out);
      for (const auto& r : rows)
        std::printf("d=%4zu mean=%.6fs sd=%.6fs\n", r.d, r.mean_seconds, r.stddev_seconds);
      return 0;
    }
    if (*plot) {
      const auto rows = harness::read_csv(plot_in);
      harness::emit_plot(rows, plot_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
