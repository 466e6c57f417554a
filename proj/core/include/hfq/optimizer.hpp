#pragma once

#include "hfq/types.hpp"

#include <functional>
#include <vector>

namespace hfq {

// Smooth objective: returns f(x) and writes the gradient into `grad`.
using SmoothObjective = std::function<double(const Vector& x, Vector& grad)>;

struct OptimizerOptions {
  int max_iterations = 5000;
  // Stop once the relative objective change falls below this and the
  // (pseudo-)gradient is small.
  double tolerance = 1e-6;
  double gradient_tolerance = 1e-4;
  int history = 10;
};

struct OptimizerResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimizes smooth(x) + l1 * sum_{i : penalized[i]} |x_i|.
// L-BFGS when l1 == 0, orthant-wise limited-memory quasi-Newton otherwise.
// Fully deterministic for a given input.
OptimizerResult minimize(const SmoothObjective& smooth, Vector x0, double l1,
                         const std::vector<bool>& penalized,
                         const OptimizerOptions& options);

}  // namespace hfq
