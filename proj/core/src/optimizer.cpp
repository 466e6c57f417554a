#include "hfq/optimizer.hpp"

#include "hfq/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace hfq {
namespace {

double l1_norm(const Vector& x, const std::vector<bool>& penalized) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (penalized[static_cast<std::size_t>(i)]) s += std::abs(x(i));
  }
  return s;
}

// Minimum-norm subgradient of smooth + l1 * |x| over penalized coordinates.
Vector pseudo_gradient(const Vector& x, const Vector& g, double l1,
                       const std::vector<bool>& penalized) {
  Vector pg = g;
  if (l1 == 0.0) return pg;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!penalized[static_cast<std::size_t>(i)]) continue;
    if (x(i) > 0.0) {
      pg(i) = g(i) + l1;
    } else if (x(i) < 0.0) {
      pg(i) = g(i) - l1;
    } else if (g(i) + l1 < 0.0) {
      pg(i) = g(i) + l1;
    } else if (g(i) - l1 > 0.0) {
      pg(i) = g(i) - l1;
    } else {
      pg(i) = 0.0;
    }
  }
  return pg;
}

struct Correction {
  Vector s;
  Vector y;
  double rho;
};

}  // namespace

OptimizerResult minimize(const SmoothObjective& smooth, Vector x, double l1,
                         const std::vector<bool>& penalized, const OptimizerOptions& options) {
  const auto n = x.size();
  require(static_cast<Eigen::Index>(penalized.size()) == n, ErrorCode::invalid_input,
          "penalty mask length does not match the parameter vector");
  const bool orthant = l1 > 0.0;

  Vector g(n);
  double f = smooth(x, g);
  double total = f + (orthant ? l1 * l1_norm(x, penalized) : 0.0);
  require(std::isfinite(total), ErrorCode::invalid_input, "objective is not finite at the start point");

  std::deque<Correction> memory;
  OptimizerResult result;
  Vector pg = pseudo_gradient(x, g, l1, penalized);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    if (pg.lpNorm<Eigen::Infinity>() <= 1e-12) {
      result.converged = true;
      break;
    }

    // Two-loop recursion on the (pseudo-)gradient.
    Vector q = pg;
    std::vector<double> alpha(memory.size());
    for (std::size_t j = memory.size(); j-- > 0;) {
      alpha[j] = memory[j].rho * memory[j].s.dot(q);
      q -= alpha[j] * memory[j].y;
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t j = 0; j < memory.size(); ++j) {
      const double beta = memory[j].rho * memory[j].y.dot(q);
      q += (alpha[j] - beta) * memory[j].s;
    }
    Vector direction = -q;

    if (orthant) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (direction(i) * pg(i) >= 0.0) direction(i) = 0.0;
      }
    }
    double slope = pg.dot(direction);
    if (!(slope < 0.0)) {
      memory.clear();
      direction = -pg;
      slope = -pg.squaredNorm();
    }

    Vector sign_pattern;
    if (orthant) {
      sign_pattern.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = x(i) != 0.0 ? x(i) : -pg(i);
        sign_pattern(i) = (s > 0.0) - (s < 0.0);
      }
    }

    double step = memory.empty() ? std::min(1.0, 1.0 / direction.norm()) : 1.0;
    Vector x_new(n);
    Vector g_new(n);
    double f_new = 0.0;
    double total_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * direction;
      if (orthant) {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (penalized[static_cast<std::size_t>(i)] && x_new(i) * sign_pattern(i) <= 0.0) {
            x_new(i) = 0.0;
          }
        }
      }
      f_new = smooth(x_new, g_new);
      total_new = f_new + (orthant ? l1 * l1_norm(x_new, penalized) : 0.0);
      const double decrease = orthant ? pg.dot(x_new - x) : step * slope;
      if (std::isfinite(total_new) && total_new <= total + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      // No descent possible along the steepest direction: numerically stationary.
      result.converged = pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
      break;
    }

    Vector s = x_new - x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }

    const double change = std::abs(total - total_new);
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    total = total_new;
    pg = pseudo_gradient(x, g, l1, penalized);

    if (change <= options.tolerance * std::max(1.0, std::abs(total)) &&
        pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.x = std::move(x);
  result.value = total;
  return result;
}

}  // namespace hfq
