// Acceptance checks. `acceptance --criterion N` runs one criterion, no
// argument runs all eight. Each prints one PASS/FAIL line; the exit status is
// non-zero if any selected criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "alloc_counter.hpp"
#include "crfmnes/harness.hpp"
#include "crfmnes/natgrad.hpp"
#include "crfmnes/strategy.hpp"
#include "oracle.hpp"
#include "svg_check.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace crfmnes;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned worker_count() { return std::clamp(std::thread::hardware_concurrency(), 1u, 8u); }

double rel_inf(const Vector& a, const Eigen::VectorXd& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b(static_cast<Eigen::Index>(i))));
    den = std::max(den, std::abs(b(static_cast<Eigen::Index>(i))));
  }
  return num / den;
}

std::uint64_t median(std::vector<std::uint64_t> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2;
}

// 1
Outcome schur_identity() {
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t d = 2 + static_cast<std::size_t>(rep % 19);
    const auto p = testsupport::random_params(d, gen);
    const double a = 1.0 - unit(gen);  // (0, 1]
    const auto lhs = oracle::schur_lhs_dense(p.v, p.d_diag, a);
    const auto rhs = oracle::schur_rhs_dense(p.v, p.d_diag, a);
    worst = std::max(worst, (lhs - rhs).norm() / lhs.norm());
  }
  return {worst < 1e-10, fmt("1000 instances, d 2..20, max relative Frobenius error %.3e", worst)};
}

// 2
Outcome fast_vs_dense() {
  std::mt19937_64 gen(2002);
  double worst = 0.0;
  int compared = 0, skipped = 0;
  double worst_cond = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 2 + static_cast<std::size_t>(rep % 7);
    const auto p = testsupport::random_params(d, gen);
    const auto x = testsupport::random_point(p, gen);
    const auto dense = oracle::dense_natgrad(x, p);
    worst_cond = std::max(worst_cond, dense.condition);
    if (dense.ill_conditioned) {
      ++skipped;
      std::printf("  skipped instance %d (d=%zu): Fisher condition %.3e\n", rep, d, dense.condition);
      continue;
    }
    const auto ws = compute_st(x, p);
    double n = 0.0;
    for (double e : p.v) n += e * e;
    n = std::sqrt(n);
    Vector gv(d), gd(d);
    for (std::size_t i = 0; i < d; ++i) {
      gv[i] = ws.t[i] / n;
      gd[i] = p.d_diag[i] * ws.s[i];
    }
    worst = std::max({worst, rel_inf(gv, dense.grad_v), rel_inf(gd, dense.grad_d)});
    ++compared;
  }
  return {worst < 1e-6 && compared > 0,
          fmt("%d compared, %d skipped as ill-conditioned, max relative error %.3e, max cond %.2e",
              compared, skipped, worst, worst_cond)};
}

// 3
Outcome invariants() {
  std::vector<std::string> broken;

  // Determinant of the shape matrix after every generation, from the dense
  // covariance rather than the library's own log-det.
  double det_err = 0.0;
  for (bench::Function f : {bench::Function::sphere, bench::Function::ellipsoid,
                            bench::Function::rosenbrock, bench::Function::rastrigin}) {
    const std::size_t d = 10;
    const auto spec = bench::preset(f, d);
    StrategyConfig cfg;
    cfg.dim = d;
    cfg.init.m = spec.init_m;
    cfg.init.sigma = spec.init_sigma;
    cfg.seed = 31;
    Optimizer opt(cfg);
    for (int g = 0; g < 400; ++g) {
      const auto xs = opt.ask();
      std::vector<double> fv;
      for (const auto& x : xs) fv.push_back(bench::evaluate(spec, x));
      opt.tell(fv);
      const auto& p = opt.params();
      const double det = oracle::covariance(p).determinant() / std::pow(p.sigma, 2.0 * d);
      det_err = std::max(det_err, std::abs(det - 1.0));
      if (opt.best_fval() <= cfg.target_fval) break;
    }
  }
  if (!(det_err <= 1e-8)) broken.push_back("determinant");

  double wsum = 0.0;
  std::mt19937_64 gen(3003);
  std::normal_distribution<double> n01;
  for (std::size_t lambda = 2; lambda <= 2000; lambda += 2) {
    const auto r = rank_weights(lambda);
    double s = 0.0;
    for (double w : r.w) s += w;
    wsum = std::max(wsum, std::abs(s));
  }
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d = 2 + static_cast<std::size_t>(rep % 100);
    const std::size_t lambda = default_lambda(d) * (1 + static_cast<std::size_t>(rep % 5));
    Vector norms(lambda);
    for (auto& e : norms) e = std::sqrt(static_cast<double>(d)) + n01(gen);
    for (auto& e : norms) e = std::abs(e);
    const auto w = distance_weights_from_norms(norms, alpha_dist(d, lambda));
    double s = 0.0;
    for (double x : w.w) s += x;
    wsum = std::max(wsum, std::abs(s));
  }
  if (!(wsum <= 1e-12)) broken.push_back("weight sums");

  bool antithetic = true;
  double mirror = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 1 + static_cast<std::size_t>(rep % 50);
    const auto p = testsupport::random_params(std::max<std::size_t>(d, 2), gen);
    Rng rng(static_cast<std::uint64_t>(rep));
    const auto pop = sample_population(p, 2 + 2 * static_cast<std::size_t>(rep % 10), rng);
    for (std::size_t k = 0; k + 1 < pop.size(); k += 2) {
      const auto& a = pop.candidates[k];
      const auto& b = pop.candidates[k + 1];
      for (std::size_t i = 0; i < a.z.size(); ++i) {
        if (!(b.z[i] == -a.z[i] && b.y[i] == -a.y[i])) antithetic = false;
        const double scale = std::abs(p.m[i]) + std::abs(a.x[i] - p.m[i]);
        mirror = std::max(mirror, std::abs(a.x[i] + b.x[i] - 2.0 * p.m[i]) / scale);
      }
    }
  }
  if (!antithetic || !(mirror <= 4.0 * std::numeric_limits<double>::epsilon()))
    broken.push_back("antithetic pairing");

  double residual = 0.0;
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t d = 2 + static_cast<std::size_t>(rep % 60);
    const auto p = testsupport::random_params(d, gen);
    const StContext ctx = make_st_context(p.v);
    Vector s0(d);
    for (auto& e : s0) e = n01(gen);
    Vector s = s0;
    solve_schur(ctx, s);
    double ip = 0.0;
    for (std::size_t i = 0; i < d; ++i) ip += ctx.vbarbar[i] * s[i];
    for (std::size_t i = 0; i < d; ++i)
      residual = std::max(residual, std::abs(ctx.h_diag[i] * s[i] + ctx.b * ctx.vbarbar[i] * ip -
                                             s0[i]) / testsupport::max_abs(s0));
  }
  if (!(residual < 1e-10)) broken.push_back("step-4 residual");

  std::size_t nonpositive = 0;
  double min_h = 1e300;
  std::uniform_real_distribution<double> logscale(-3.0, 3.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const std::size_t d = 2 + static_cast<std::size_t>(rep % 99);
    Vector v(d);
    const double scale = std::pow(10.0, logscale(gen));
    for (auto& e : v) e = scale * n01(gen);
    if (rep % 7 == 0) v[0] *= 1e4;
    try {
      const StContext ctx = make_st_context(v);
      for (double h : ctx.h_diag) {
        min_h = std::min(min_h, h);
        if (!(h > 0.0)) ++nonpositive;
      }
    } catch (const NumericalError&) {
      ++nonpositive;
    }
  }
  if (nonpositive != 0) broken.push_back("H positivity");

  std::string detail = fmt(
      "det err %.2e, weight sum %.2e, antithetic %s (x mirror %.1e rel), step-4 residual %.2e, "
      "min H %.3e over 1e4 v",
      det_err, wsum, antithetic ? "exact" : "BROKEN", mirror, residual, min_h);
  for (const auto& b : broken) detail += "; failed: " + b;
  return {broken.empty(), detail};
}

// 4
Outcome convergence_d40() {
  const std::size_t d = 40;
  const fs::path baseline_path = CRFMNES_BASELINE_PATH;
  std::map<std::string, std::uint64_t> baseline;
  if (fs::exists(baseline_path)) {
    std::ifstream in(baseline_path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string name, dim, lam, med;
      std::getline(ss, name, ',');
      std::getline(ss, dim, ',');
      std::getline(ss, lam, ',');
      std::getline(ss, med, ',');
      baseline[name] = std::stoull(med);
    }
  }

  bool ok = true;
  std::string detail;
  std::map<std::string, std::uint64_t> medians;
  for (bench::Function f : {bench::Function::sphere, bench::Function::ellipsoid,
                            bench::Function::ktablet, bench::Function::rosenbrock}) {
    harness::ExperimentGrid grid;
    grid.function = f;
    grid.d = d;
    grid.lambdas = {default_lambda(d)};
    grid.trials = 10;
    grid.base_seed = 4000;
    harness::RunOptions opt;
    opt.jobs = worker_count();
    const auto recs = harness::run_experiment(grid, opt);
    std::size_t succ = 0;
    std::vector<std::uint64_t> evals;
    for (const auto& r : recs) {
      evals.push_back(r.evals_used);
      if (r.success) ++succ;
    }
    const double rate = static_cast<double>(succ) / 10.0;
    const std::string name(bench::to_string(f));
    const std::uint64_t med = median(evals);
    medians[name] = med;
    detail += fmt("%s rate %.1f median %llu", name.c_str(), rate,
                  static_cast<unsigned long long>(med));
    if (rate < 0.9) ok = false;
    if (auto it = baseline.find(name); it != baseline.end()) {
      const double ratio = static_cast<double>(med) / static_cast<double>(it->second);
      detail += fmt(" (%.3f x baseline)", ratio);
      if (ratio > 1.2) ok = false;
    }
    detail += "; ";
  }

  if (baseline.empty()) {
    if (ok) {
      std::ofstream out(baseline_path);
      out << "function,d,lambda,median_evals\n";
      for (const auto& [name, med] : medians)
        out << name << ',' << d << ',' << default_lambda(d) << ',' << med << '\n';
      detail += "baseline pinned to " + baseline_path.string();
    } else {
      detail += "no baseline pinned (run did not pass)";
    }
  } else if (baseline.size() != 4) {
    ok = false;
    detail += "baseline file incomplete";
  }
  return {ok, detail};
}

Outcome success_run(bench::Function f, std::size_t d, std::size_t lambda, double need,
                    std::uint64_t seed) {
  harness::ExperimentGrid grid;
  grid.function = f;
  grid.d = d;
  grid.lambdas = {lambda};
  grid.trials = 10;
  grid.base_seed = seed;
  harness::RunOptions opt;
  opt.jobs = worker_count();
  const auto recs = harness::run_experiment(grid, opt);
  const auto row = harness::success_metric(bench::to_string(f), d, recs).front();
  std::string detail = fmt("%s d=%zu lambda=%zu: success rate %.2f", bench::to_string(f).data(),
                           d, lambda, row.success_rate);
  if (row.mean_evals_success) detail += fmt(", mean evals %.0f", *row.mean_evals_success);
  return {row.success_rate >= need, detail};
}

// 7
Outcome scaling() {
  const std::vector<std::size_t> dims{10, 100};
  const auto rows = harness::timing_bench(dims, 20, 1000, 5);
  const double ratio = rows[1].mean_seconds / rows[0].mean_seconds;

  // Allocation profile of construction and of steady-state generations.
  auto profile = [](std::size_t d) {
    StrategyConfig cfg;
    cfg.dim = d;
    cfg.lambda = 20;
    cfg.init.m.assign(d, 1.0);
    cfg.init.sigma = 1.0;
    cfg.seed = 7;
    alloc_counter::start();
    auto opt = std::make_unique<Optimizer>(cfg);
    const auto build = alloc_counter::stop();
    std::vector<double> fv(20);
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u;
    auto generation = [&] {
      opt->ask();
      for (auto& f : fv) f = u(gen);
      opt->tell(fv);
    };
    for (int g = 0; g < 10; ++g) generation();
    alloc_counter::start();
    for (int g = 0; g < 100; ++g) generation();
    const auto steady = alloc_counter::stop();
    return std::make_pair(build, steady);
  };
  const auto [b_small, s_small] = profile(100);
  const auto [b_big, s_big] = profile(800);
  const double build_ratio = static_cast<double>(b_big.bytes) / static_cast<double>(b_small.bytes);
  const double step_ratio = static_cast<double>(s_big.bytes) / static_cast<double>(s_small.bytes);
  const std::size_t dd_bytes = 800 * 800 * sizeof(double);
  const std::size_t largest = std::max(b_big.max_bytes, s_big.max_bytes);

  // 8x the dimension; allow slack for constant-size pieces but nowhere near 64x.
  const bool linear = build_ratio <= 10.0 && step_ratio <= 10.0;
  const bool no_dd = largest < dd_bytes / 8;
  return {ratio <= 15.0 && linear && no_dd,
          fmt("time(d=100)/time(d=10) = %.2f (%.3fs / %.3fs per 1000 iters); bytes d=800 vs 100: "
              "state %.2fx, per-generation %.2fx; largest single allocation %zu B (d*d*8 = %zu B)",
              ratio, rows[1].mean_seconds, rows[0].mean_seconds, build_ratio, step_ratio, largest,
              dd_bytes)};
}

// 8
Outcome cli_round_trip() {
  const fs::path dir = fs::temp_directory_path() / "crfmnes_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = CRFMNES_CLI_PATH;
  const std::string run = "\"" + cli + "\" run --function sphere --dim 10 --lambdas 10,20 "
                          "--trials 5 --seed 8 --out \"" + dir.string() + "\" > \"" +
                          (dir / "run.log").string() + "\" 2>&1";
  if (std::system(run.c_str()) != 0) return {false, "cli run failed: " + run};
  const std::string plot = "\"" + cli + "\" plot --in \"" + (dir / "metrics.csv").string() +
                           "\" --out \"" + (dir / "replot.svg").string() + "\"";
  if (std::system(plot.c_str()) != 0) return {false, "cli plot failed"};

  const auto rows = harness::read_csv(dir / "metrics.csv");
  bool ok = rows.size() == 2;
  double worst = 0.0;
  for (const auto& r : rows) {
    if (!r.sp_metric || !r.mean_evals_success) {
      ok = false;
      continue;
    }
    worst = std::max(worst, std::abs(*r.sp_metric * r.success_rate - *r.mean_evals_success) /
                                *r.mean_evals_success);
  }
  ok = ok && worst <= 1e-9;

  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto a = testsupport::check_svg(read(dir / "metrics.svg"));
  auto b = testsupport::check_svg(read(dir / "replot.svg"));
  ok = ok && a.well_formed && b.well_formed && b.class_counts["point"] == 2;
  return {ok, fmt("%zu rows, max |sp*rate - mean|/mean %.2e, svg %s/%s", rows.size(), worst,
                  a.well_formed ? "ok" : a.error.c_str(), b.well_formed ? "ok" : b.error.c_str())};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "schur identity", 10, schur_identity},
      {2, "fast natural gradient vs dense", 60, fast_vs_dense},
      {3, "structural invariants", 30, invariants},
      {4, "convergence d=40", 300, convergence_d40},
      {5, "rosenbrock d=80",
       600, [] { return success_run(bench::Function::rosenbrock, 80, 18, 0.8, 5000); }},
      {6, "rastrigin d=80",
       1200, [] { return success_run(bench::Function::rastrigin, 80, 1600, 0.5, 6000); }},
      {7, "linear-time scaling", 120, scaling},
      {8, "cli round trip", 60, cli_round_trip},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
      return 2;
    }
  }
  if (selected.empty())
    for (const auto& c : all) selected.push_back(c.id);

  bool all_pass = true;
  for (int id : selected) {
    const auto it = std::find_if(all.begin(), all.end(), [id](const auto& c) { return c.id == id; });
    if (it == all.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = it->run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= it->limit_seconds;
    const bool pass = out.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("CRITERION %d %s: %s (%.1fs of %.0fs%s) %s\n", it->id, it->name,
                pass ? "PASS" : "FAIL", secs, it->limit_seconds, in_time ? "" : ", OVER TIME",
                out.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
