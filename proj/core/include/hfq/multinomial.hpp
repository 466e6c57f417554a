#pragma once

#include "hfq/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hfq {

// Numerically stable softmax; output sums to 1.
Vector softmax(const Eigen::Ref<const Vector>& logits);

// Shannon entropy in nats.
double entropy(const Eigen::Ref<const Vector>& p);

std::size_t argmax(const Eigen::Ref<const Vector>& v);

Vector predict_proba(const Eigen::MatrixXd& weights, const Vector& bias,
                     const Eigen::Ref<const Vector>& x);
Vector predict_proba(const LinearModel& model, const Eigen::Ref<const Vector>& x);
Vector predict_proba(const JointModel& model, const Eigen::Ref<const Vector>& x_machine,
                     const Eigen::Ref<const Vector>& x_human);

// Row-wise class probabilities, N x K.
Matrix predict_proba_batch(const LinearModel& model, const Matrix& x);
Labels predict_labels(const LinearModel& model, const Matrix& x);

// Per-instance loss weights; balanced weighting gives N / (K * count(class)).
std::vector<double> instance_weights(std::span<const int> y, std::size_t num_classes,
                                     ClassWeighting weighting);

// Smooth part of the regularized multinomial objective
//
//   (1/N) sum_i w_i * CE(y_i, softmax(W x_i + b)) + [L2] 1/(2 C N) ||W||^2
//
// over packed parameters [W row-major (K x D), b (K)]. The intercept is not
// penalized. The L1 term, when present, is left to the optimizer with
// strength l1_strength().
class MultinomialObjective {
 public:
  MultinomialObjective(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                       const Hyperparameters& hyper);

  double operator()(const Vector& params, Vector& grad) const;

  std::size_t num_params() const { return k_ * (d_ + 1); }
  double l1_strength() const;
  std::vector<bool> penalized() const;

  Vector pack(const Eigen::MatrixXd& weights, const Vector& bias) const;
  void unpack(const Vector& params, Eigen::MatrixXd& weights, Vector& bias) const;

 private:
  const Matrix& x_;
  Eigen::MatrixXd targets_;  // one-hot N x K
  Vector w_;                 // instance weights / N
  std::size_t k_;
  std::size_t d_;
  Hyperparameters hyper_;
};

// Fits the multinomial logistic model. Throws degenerate_labels when fewer
// than two classes occur and invalid_input on shape or finiteness problems.
// Non-convergence is reported via LinearModel::converged.
LinearModel fit_multinomial(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                            const Hyperparameters& hyper, std::uint64_t seed);

// Mean negative log-likelihood of the true class.
double log_loss(const LinearModel& model, const Matrix& x, std::span<const int> y);

}  // namespace hfq
