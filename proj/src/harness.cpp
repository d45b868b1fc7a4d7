#include "crfmnes/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "crfmnes/strategy.hpp"

namespace crfmnes::harness {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class Int>
Int parse_int(std::string_view s) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  return value;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::uint64_t budget(const ExperimentGrid& grid) {
  return grid.max_evals == 0 ? default_budget(grid.d) : grid.max_evals;
}

std::string record_line(const ExperimentGrid& grid, const RunRecord& r) {
  std::string line;
  line += bench::to_string(grid.function);
  line += ',' + std::to_string(grid.d);
  line += ',' + std::to_string(r.lambda);
  line += ',' + std::to_string(r.trial);
  line += ',' + std::to_string(grid.base_seed + r.trial);
  line += ',' + std::to_string(r.evals_used);
  line += ',' + format_double(r.best_fval);
  line += r.success ? ",1" : ",0";
  line += ',' + format_double(r.wall_seconds);
  return line;
}

// Appends lines to the record file, repairing a missing trailing newline
// left by an interrupted writer.
class RecordSink {
 public:
  RecordSink(const std::filesystem::path& path, const ExperimentGrid& grid) : grid_(grid) {
    if (path.empty()) return;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
    bool needs_newline = false;
    if (exists) {
      std::ifstream in(path, std::ios::binary);
      in.seekg(-1, std::ios::end);
      char last = '\n';
      in.get(last);
      needs_newline = last != '\n';
    }
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for appending");
    if (needs_newline) out_ << '\n';
    if (!exists) out_ << kRecordsHeader << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path.string());
  }

  void append(const RunRecord& r) {
    if (!out_.is_open()) return;
    std::lock_guard lock(mutex_);
    out_ << record_line(grid_, r) << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write failed while appending a run record");
  }

 private:
  const ExperimentGrid& grid_;
  std::ofstream out_;
  std::mutex mutex_;
};

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  return value;
}

std::vector<std::size_t> auto_lambdas(bench::Function f, std::size_t d) {
  if (f == bench::Function::rastrigin) return bench::rastrigin_lambdas(d);
  const std::size_t base = default_lambda(d);
  return {base, 2 * base, 3 * base, 4 * base, 5 * base};
}

void validate(const ExperimentGrid& grid) {
  if (grid.d == 0) throw std::invalid_argument("grid: d must be positive");
  if (grid.trials == 0) throw std::invalid_argument("grid: trials must be at least 1");
  if (grid.lambdas.empty()) throw std::invalid_argument("grid: no population sizes");
  for (std::size_t lambda : grid.lambdas)
    if (lambda < 2 || lambda % 2 != 0)
      throw std::invalid_argument("grid: population sizes must be even and >= 2");
  if (budget(grid) < *std::max_element(grid.lambdas.begin(), grid.lambdas.end()))
    throw std::invalid_argument("grid: budget smaller than a population size");
}

RunRecord run_trial(const ExperimentGrid& grid, std::size_t lambda, std::size_t trial) {
  const bench::BenchmarkSpec spec = bench::preset(grid.function, grid.d);
  StrategyConfig cfg;
  cfg.dim = grid.d;
  cfg.lambda = lambda;
  cfg.init.m = spec.init_m;
  cfg.init.sigma = spec.init_sigma;
  cfg.target_fval = grid.target_fval;
  cfg.max_evals = budget(grid);
  cfg.seed = grid.base_seed + trial;

  const auto start = std::chrono::steady_clock::now();
  const OptimizeResult res =
      optimize([&spec](std::span<const double> x) { return bench::evaluate(spec, x); }, cfg);
  const auto stop = std::chrono::steady_clock::now();

  RunRecord r;
  r.lambda = lambda;
  r.trial = trial;
  r.evals_used = res.evals_used;
  r.best_fval = res.best_fval;
  r.success = res.reached_target;
  r.wall_seconds = std::chrono::duration<double>(stop - start).count();
  return r;
}

std::vector<RunRecord> run_experiment(const ExperimentGrid& grid, const RunOptions& options) {
  validate(grid);

  std::map<std::pair<std::size_t, std::size_t>, RunRecord> done;
  if (!options.records_path.empty() && std::filesystem::exists(options.records_path)) {
    for (const RunRecord& r :
         read_records(options.records_path, bench::to_string(grid.function), grid.d))
      done.emplace(std::make_pair(r.lambda, r.trial), r);
  }

  std::vector<std::pair<std::size_t, std::size_t>> todo;
  for (std::size_t lambda : grid.lambdas)
    for (std::size_t trial = 0; trial < grid.trials; ++trial)
      if (!done.contains({lambda, trial})) todo.emplace_back(lambda, trial);

  RecordSink sink(options.records_path, grid);
  std::mutex done_mutex;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      try {
        const RunRecord r = run_trial(grid, todo[i].first, todo[i].second);
        sink.append(r);
        std::lock_guard lock(done_mutex);
        done.emplace(todo[i], r);
        if (options.on_record) options.on_record(r);
      } catch (...) {
        std::lock_guard lock(done_mutex);
        if (!failure) failure = std::current_exception();
        next.store(todo.size());
        return;
      }
    }
  };

  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RunRecord> out;
  out.reserve(grid.lambdas.size() * grid.trials);
  for (std::size_t lambda : grid.lambdas)
    for (std::size_t trial = 0; trial < grid.trials; ++trial) out.push_back(done.at({lambda, trial}));
  return out;
}

std::vector<MetricRow> success_metric(std::string_view function, std::size_t d,
                                      std::span<const RunRecord> records) {
  std::vector<std::size_t> order;
  std::map<std::size_t, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) {
    auto [it, inserted] = groups.try_emplace(r.lambda);
    if (inserted) order.push_back(r.lambda);
    it->second.push_back(&r);
  }

  std::vector<MetricRow> rows;
  for (std::size_t lambda : order) {
    const auto& group = groups.at(lambda);
    MetricRow row;
    row.function = std::string(function);
    row.d = d;
    row.lambda = lambda;
    row.trials = group.size();
    std::size_t successes = 0;
    double evals = 0.0;
    for (const RunRecord* r : group) {
      if (!r->success) continue;
      ++successes;
      evals += static_cast<double>(r->evals_used);
    }
    row.success_rate = static_cast<double>(successes) / static_cast<double>(row.trials);
    if (successes > 0) {
      row.mean_evals_success = evals / static_cast<double>(successes);
      row.sp_metric = *row.mean_evals_success / row.success_rate;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(std::span<const MetricRow> rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << kMetricsHeader << '\n';
  for (const MetricRow& r : rows) {
    out << r.function << ',' << r.d << ',' << r.lambda << ',' << r.trials << ','
        << format_double(r.success_rate) << ','
        << (r.mean_evals_success ? format_double(*r.mean_evals_success) : "") << ','
        << (r.sp_metric ? format_double(*r.sp_metric) : "") << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<MetricRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != kMetricsHeader)
    throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    const std::string_view view = trim_cr(line);
    if (view.empty()) continue;
    const auto f = split(view, ',');
    if (f.size() != 7) throw std::runtime_error(path.string() + ": malformed row");
    MetricRow r;
    r.function = std::string(f[0]);
    r.d = parse_int<std::size_t>(f[1]);
    r.lambda = parse_int<std::size_t>(f[2]);
    r.trials = parse_int<std::size_t>(f[3]);
    r.success_rate = parse_double(f[4]);
    if (!f[5].empty()) r.mean_evals_success = parse_double(f[5]);
    if (!f[6].empty()) r.sp_metric = parse_double(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<RunRecord> read_records(const std::filesystem::path& path, std::string_view function,
                                    std::size_t d) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<RunRecord> out;
  std::istringstream lines(content);
  std::string line;
  bool header = true;
  while (std::getline(lines, line)) {
    // A line not terminated by '\n' at EOF was cut off mid-write.
    if (lines.eof() && !content.empty() && content.back() != '\n') break;
    const std::string_view view = trim_cr(line);
    if (header) {
      header = false;
      if (view == kRecordsHeader) continue;
    }
    const auto f = split(view, ',');
    if (f.size() != 9) continue;
    try {
      if (f[0] != function || parse_int<std::size_t>(f[1]) != d) continue;
      RunRecord r;
      r.lambda = parse_int<std::size_t>(f[2]);
      r.trial = parse_int<std::size_t>(f[3]);
      r.evals_used = parse_int<std::uint64_t>(f[5]);
      r.best_fval = parse_double(f[6]);
      r.success = f[7] == "1";
      r.wall_seconds = parse_double(f[8]);
      out.push_back(r);
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  return out;
}

std::vector<TimingRow> timing_bench(std::span<const std::size_t> dims, std::size_t lambda,
                                    std::size_t iterations, std::size_t repeats) {
  if (repeats == 0 || iterations == 0)
    throw std::invalid_argument("timing_bench: iterations and repeats must be positive");
  std::vector<TimingRow> rows;
  Vector fvals(lambda, 0.0);
  for (std::size_t d : dims) {
    std::vector<double> times;
    times.reserve(repeats);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      StrategyConfig cfg;
      cfg.dim = d;
      cfg.lambda = lambda;
      cfg.init.m.assign(d, 0.0);
      cfg.init.sigma = 1.0;
      cfg.max_evals = static_cast<std::uint64_t>(lambda) * iterations;
      cfg.seed = rep;
      Optimizer opt(cfg);
      const auto start = std::chrono::steady_clock::now();
      for (std::size_t it = 0; it < iterations; ++it) {
        opt.ask();
        opt.tell(fvals);
      }
      const auto stop = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    double mean = 0.0;
    for (double t : times) mean += t;
    mean /= static_cast<double>(times.size());
    double var = 0.0;
    for (double t : times) var += (t - mean) * (t - mean);
    const double stddev =
        times.size() > 1 ? std::sqrt(var / static_cast<double>(times.size() - 1)) : 0.0;
    rows.push_back({d, lambda, iterations, repeats, mean, stddev});
  }
  return rows;
}

void write_timing_csv(std::span<const TimingRow> rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "d,lambda,iterations,repeats,mean_seconds,stddev_seconds\n";
  for (const TimingRow& r : rows)
    out << r.d << ',' << r.lambda << ',' << r.iterations << ',' << r.repeats << ','
        << format_double(r.mean_seconds) << ',' << format_double(r.stddev_seconds) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace crfmnes::harness
