#include "crfmnes/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace crfmnes::bench {

std::string_view to_string(Function f) {
  switch (f) {
    case Function::sphere:
      return "sphere";
    case Function::ktablet:
      return "ktablet";
    case Function::ellipsoid:
      return "ellipsoid";
    case Function::rosenbrock:
      return "rosenbrock";
    case Function::rastrigin:
      return "rastrigin";
  }
  return "unknown";
}

std::vector<Function> all_functions() {
  return {Function::sphere, Function::ktablet, Function::ellipsoid, Function::rosenbrock,
          Function::rastrigin};
}

std::optional<Function> parse_function(std::string_view name) {
  for (Function f : all_functions())
    if (to_string(f) == name) return f;
  return std::nullopt;
}

double sphere(std::span<const double> x) {
  double acc = 0.0;
  for (double xi : x) acc += xi * xi;
  return acc;
}

double ktablet(std::span<const double> x, std::size_t k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = i < k ? x[i] : 100.0 * x[i];
    acc += xi * xi;
  }
  return acc;
}

double ellipsoid(std::span<const double> x) {
  const std::size_t d = x.size();
  if (d == 1) return x[0] * x[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double scaled =
        std::pow(1000.0, static_cast<double>(i) / static_cast<double>(d - 1)) * x[i];
    acc += scaled * scaled;
  }
  return acc;
}

double rosenbrock(std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = x[i] - 1.0;
    acc += 100.0 * a * a + b * b;
  }
  return acc;
}

double rastrigin(std::span<const double> x) {
  double acc = 10.0 * static_cast<double>(x.size());
  for (double xi : x) acc += xi * xi - 10.0 * std::cos(2.0 * std::numbers::pi * xi);
  return acc;
}

double evaluate(const BenchmarkSpec& spec, std::span<const double> x) {
  if (x.size() != spec.d)
    throw std::invalid_argument("evaluate: expected length " + std::to_string(spec.d) + ", got " +
                                std::to_string(x.size()));
  switch (spec.name) {
    case Function::sphere:
      return sphere(x);
    case Function::ktablet:
      return ktablet(x, spec.k);
    case Function::ellipsoid:
      return ellipsoid(x);
    case Function::rosenbrock:
      return rosenbrock(x);
    case Function::rastrigin:
      return rastrigin(x);
  }
  throw std::invalid_argument("evaluate: unknown function");
}

BenchmarkSpec preset(Function name, std::size_t d) {
  if (d == 0) throw std::invalid_argument("preset: dimension must be positive");
  BenchmarkSpec spec;
  spec.name = name;
  spec.d = d;
  spec.k = name == Function::ktablet ? d / 4 : 0;
  if (name == Function::rosenbrock) {
    spec.init_m.assign(d, 0.0);
    spec.init_sigma = 0.5;
  } else {
    spec.init_m.assign(d, 3.0);
    spec.init_sigma = 2.0;
  }
  return spec;
}

std::vector<std::size_t> rastrigin_lambdas(std::size_t d) {
  std::vector<double> factors;
  switch (d) {
    case 80:
      factors = {20, 22, 24, 26, 28};
      break;
    case 200:
      factors = {12, 14, 16, 18, 20};
      break;
    case 600:
      factors = {6, 7, 8, 9, 10};
      break;
    case 1000:
      factors = {4, 4.5, 5, 5.5, 6};
      break;
    default:
      throw std::invalid_argument("rastrigin_lambdas: no preset population sizes for d = " +
                                  std::to_string(d));
  }
  std::vector<std::size_t> out;
  for (double f : factors) {
    auto lambda = static_cast<std::size_t>(std::ceil(f * static_cast<double>(d)));
    if (lambda % 2 != 0) ++lambda;
    out.push_back(lambda);
  }
  return out;
}

}  // namespace crfmnes::bench
