#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "crfmnes/common.hpp"

namespace crfmnes::bench {

enum class Function { sphere, ktablet, ellipsoid, rosenbrock, rastrigin };

struct BenchmarkSpec {
  Function name = Function::sphere;
  std::size_t d = 0;
  std::size_t k = 0;  // k-Tablet only: floor(d / 4)
  Vector init_m;
  double init_sigma = 2.0;
};

std::string_view to_string(Function f);
std::optional<Function> parse_function(std::string_view name);
std::vector<Function> all_functions();

// Throws std::invalid_argument on a length mismatch.
double evaluate(const BenchmarkSpec& spec, std::span<const double> x);

double sphere(std::span<const double> x);
double ktablet(std::span<const double> x, std::size_t k);
double ellipsoid(std::span<const double> x);
double rosenbrock(std::span<const double> x);
double rastrigin(std::span<const double> x);

// Initial distribution per function: m = 3, sigma = 2 except Rosenbrock
// (m = 0, sigma = 0.5).
BenchmarkSpec preset(Function name, std::size_t d);

// Population sizes used for Rastrigin at d in {80, 200, 600, 1000}; each
// entry rounded up to an even number. Throws std::invalid_argument for other d.
std::vector<std::size_t> rastrigin_lambdas(std::size_t d);

}  // namespace crfmnes::bench
