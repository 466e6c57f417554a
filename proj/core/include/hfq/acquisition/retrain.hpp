#pragma once

#include "hfq/acquisition/marginal.hpp"
#include "hfq/acquisition/query.hpp"
#include "hfq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hfq {

// Prediction function retrained on mask-zeroed human features:
// f^zero(x^m, x^h, q) = softmax(theta_m_bar x^m + theta_h_bar (x^h . q) + phi_bar).
struct MaskedModel {
  Eigen::MatrixXd theta_m_bar;  // K x D_m
  Eigen::MatrixXd theta_h_bar;  // K x D_h
  Vector phi_bar;               // K
  std::size_t trained_budget = 0;
  Hyperparameters hyper;
  std::uint64_t seed = 0;

  void validate() const;
};

// Greedy query orders for every row of a labelled split, answered from the
// split's own human features. Greedy masks are nested, so the budget-b mask
// of a row is the first b entries of its order.
struct TrainMasks {
  std::vector<std::vector<std::size_t>> orders;
  std::size_t human_dim = 0;
  std::size_t budget = 0;

  // N x D_h 0/1 matrix for budget b <= budget.
  Matrix mask(std::size_t b) const;
};

// Row n uses mode.derived(n).
TrainMasks compute_train_masks(const JointModel& model, const ConditionalModels& cond,
                               const Dataset& data, std::size_t budget,
                               const MarginalMode& mode, std::size_t threads = 0);

// Fits the multinomial form on (X^m, X^h . Q) with validation selection by
// macro-F1 on the equally masked validation split.
MaskedModel retrain_masked(const Dataset& train, const Matrix& train_mask, const Dataset& valid,
                           const Matrix& valid_mask, std::span<const Hyperparameters> grid,
                           std::size_t budget, std::uint64_t seed);

// Softmax with unanswered human dimensions contributing zero.
Vector predict_zero(const MaskedModel& model, const Eigen::Ref<const Vector>& x_machine,
                    const AnswerSet& answers);

}  // namespace hfq
