#pragma once

#include "hfq/types.hpp"

#include <cstdint>
#include <span>

namespace hfq {

inline constexpr double kConstantFeatureClamp = 1e-6;

double sigmoid(double z) noexcept;

struct BinaryLogistic {
  Vector weights;
  double intercept = 0.0;
  bool converged = true;
};

// Regularized binary logistic regression; labels in {0, 1}.
BinaryLogistic fit_binary_logistic(const Matrix& x, std::span<const double> y,
                                   const Hyperparameters& hyper);

double binary_log_loss(const BinaryLogistic& model, const Matrix& x, std::span<const double> y);

// One independent logistic model per human dimension, each selected by
// validation log-loss. Dimensions constant in training get a bias-only model
// at the empirical rate clamped to [1e-6, 1 - 1e-6].
ConditionalModels fit_conditionals(const Dataset& train, const Dataset& valid,
                                   std::span<const Hyperparameters> grid, std::uint64_t seed,
                                   std::size_t threads = 0);

}  // namespace hfq
