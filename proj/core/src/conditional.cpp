#include "hfq/conditional.hpp"

#include "hfq/error.hpp"
#include "hfq/optimizer.hpp"
#include "hfq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hfq {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

BinaryLogistic fit_binary_logistic(const Matrix& x, std::span<const double> y,
                                   const Hyperparameters& hyper) {
  const auto n = x.rows();
  const auto d = x.cols();
  require(static_cast<std::size_t>(n) == y.size() && n > 0, ErrorCode::invalid_input,
          "binary logistic needs one target per row");
  require(hyper.inverse_reg_strength > 0.0, ErrorCode::invalid_input,
          "inverse regularization strength must be positive");

  double positives = 0.0;
  for (double v : y) positives += v;
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double weight = 1.0;
    if (hyper.class_weighting == ClassWeighting::balanced) {
      const double count = y[static_cast<std::size_t>(i)] > 0.5 ? positives
                                                                  : static_cast<double>(n) - positives;
      weight = static_cast<double>(n) / (2.0 * count);
    }
    w(i) = weight / static_cast<double>(n);
  }
  Eigen::Map<const Vector> target(y.data(), n);
  const double lambda = 1.0 / (hyper.inverse_reg_strength * static_cast<double>(n));

  auto objective = [&](const Vector& params, Vector& grad) {
    const auto coef = params.head(d);
    const double b = params(d);
    const Vector z = (x * coef).array() + b;
    double loss = 0.0;
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      loss += w(i) * (softplus(z(i)) - target(i) * z(i));
      r(i) = w(i) * (sigmoid(z(i)) - target(i));
    }
    grad.resize(d + 1);
    grad.head(d).noalias() = x.transpose() * r;
    grad(d) = r.sum();
    if (hyper.penalty == Penalty::l2) {
      loss += 0.5 * lambda * coef.squaredNorm();
      grad.head(d) += lambda * coef;
    }
    return loss;
  };

  std::vector<bool> penalized(static_cast<std::size_t>(d + 1), true);
  penalized.back() = false;
  OptimizerOptions options;
  options.max_iterations = hyper.max_iterations;
  options.tolerance = hyper.convergence_tolerance;
  const double l1 = hyper.penalty == Penalty::l1 ? lambda : 0.0;
  const auto result = minimize(objective, Vector::Zero(d + 1), l1, penalized, options);

  BinaryLogistic model;
  model.weights = result.x.head(d);
  model.intercept = result.x(d);
  model.converged = result.converged;
  return model;
}

double binary_log_loss(const BinaryLogistic& model, const Matrix& x, std::span<const double> y) {
  require(static_cast<std::size_t>(x.rows()) == y.size() && !y.empty(), ErrorCode::invalid_input,
          "binary log loss needs one target per row");
  const Vector z = (x * model.weights).array() + model.intercept;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // -log p(y) = softplus(z) - y z
    total += softplus(z(i)) - y[static_cast<std::size_t>(i)] * z(i);
  }
  return total / static_cast<double>(y.size());
}

ConditionalModels fit_conditionals(const Dataset& train, const Dataset& valid,
                                   std::span<const Hyperparameters> grid, std::uint64_t /*seed*/,
                                   std::size_t threads) {
  require(!grid.empty(), ErrorCode::invalid_input, "hyperparameter grid is empty");
  const auto dm = train.x_machine.cols();
  const auto dh = train.x_human.cols();
  require(train.size() > 0 && valid.size() > 0, ErrorCode::invalid_input,
          "conditional models need non-empty training and validation splits");
  require(valid.x_machine.cols() == dm && valid.x_human.cols() == dh, ErrorCode::invalid_input,
          "training and validation splits have different feature blocks");

  ConditionalModels out;
  out.weights = Eigen::MatrixXd::Zero(dh, dm);
  out.intercepts = Vector::Zero(dh);
  out.hyper.assign(static_cast<std::size_t>(dh), grid.front());
  out.bias_only.assign(static_cast<std::size_t>(dh), false);
  std::vector<char> bias_only(static_cast<std::size_t>(dh), 0);

  parallel_for(
      static_cast<std::size_t>(dh),
      [&](std::size_t dim) {
        const auto d = static_cast<Eigen::Index>(dim);
        std::vector<double> y_train(static_cast<std::size_t>(train.x_human.rows()));
        double positives = 0.0;
        for (Eigen::Index i = 0; i < train.x_human.rows(); ++i) {
          y_train[static_cast<std::size_t>(i)] = train.x_human(i, d);
          positives += train.x_human(i, d);
        }
        const double n = static_cast<double>(y_train.size());
        if (positives == 0.0 || positives == n) {
          const double rate = std::clamp(positives / n, kConstantFeatureClamp, 1.0 - kConstantFeatureClamp);
          out.intercepts(d) = std::log(rate / (1.0 - rate));
          bias_only[dim] = 1;
          return;
        }
        std::vector<double> y_valid(static_cast<std::size_t>(valid.x_human.rows()));
        for (Eigen::Index i = 0; i < valid.x_human.rows(); ++i) {
          y_valid[static_cast<std::size_t>(i)] = valid.x_human(i, d);
        }
        double best_loss = 0.0;
        bool have = false;
        for (const auto& h : grid) {
          BinaryLogistic m = fit_binary_logistic(train.x_machine, y_train, h);
          const double loss = binary_log_loss(m, valid.x_machine, y_valid);
          if (!have || loss < best_loss) {
            best_loss = loss;
            have = true;
            out.weights.row(d) = m.weights.transpose();
            out.intercepts(d) = m.intercept;
            out.hyper[dim] = h;
          }
        }
      },
      threads);

  for (std::size_t d = 0; d < bias_only.size(); ++d) out.bias_only[d] = bias_only[d] != 0;
  return out;
}

}  // namespace hfq
