#include "hfq/multinomial.hpp"

#include "hfq/error.hpp"
#include "hfq/optimizer.hpp"

#include <cmath>
#include <set>

namespace hfq {

Vector softmax(const Eigen::Ref<const Vector>& logits) {
  const double m = logits.maxCoeff();
  Vector p = (logits.array() - m).exp();
  p /= p.sum();
  return p;
}

double entropy(const Eigen::Ref<const Vector>& p) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (p(k) > 0.0) h -= p(k) * std::log(p(k));
  }
  return h;
}

std::size_t argmax(const Eigen::Ref<const Vector>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    if (v(k) > v(best)) best = k;
  }
  return static_cast<std::size_t>(best);
}

Vector predict_proba(const Eigen::MatrixXd& weights, const Vector& bias,
                     const Eigen::Ref<const Vector>& x) {
  require(weights.cols() == x.size(), ErrorCode::invalid_input,
          "input length " + std::to_string(x.size()) + " does not match model width " +
              std::to_string(weights.cols()));
  require(bias.size() == weights.rows(), ErrorCode::invalid_input,
          "bias length does not match the number of classes");
  require(x.allFinite(), ErrorCode::invalid_input, "input contains non-finite values");
  return softmax(weights * x + bias);
}

Vector predict_proba(const LinearModel& model, const Eigen::Ref<const Vector>& x) {
  return predict_proba(model.weights, model.bias, x);
}

Vector predict_proba(const JointModel& model, const Eigen::Ref<const Vector>& x_machine,
                     const Eigen::Ref<const Vector>& x_human) {
  require(x_machine.size() == model.theta_m.cols() && x_human.size() == model.theta_h.cols(),
          ErrorCode::invalid_input, "input lengths do not match the joint model");
  return softmax(model.theta_m * x_machine + model.theta_h * x_human + model.phi);
}

Matrix predict_proba_batch(const LinearModel& model, const Matrix& x) {
  require(x.cols() == model.weights.cols(), ErrorCode::invalid_input,
          "input width does not match model width");
  Matrix logits = x * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    logits.row(i) = softmax(logits.row(i).transpose()).transpose();
  }
  return logits;
}

Labels predict_labels(const LinearModel& model, const Matrix& x) {
  const Matrix p = predict_proba_batch(model, x);
  Labels out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(argmax(p.row(i).transpose()));
  }
  return out;
}

std::vector<double> instance_weights(std::span<const int> y, std::size_t num_classes,
                                     ClassWeighting weighting) {
  std::vector<double> w(y.size(), 1.0);
  if (weighting == ClassWeighting::none) return w;
  std::vector<std::size_t> counts(num_classes, 0);
  for (int c : y) ++counts[static_cast<std::size_t>(c)];
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    w[i] = n / (static_cast<double>(num_classes) *
                static_cast<double>(counts[static_cast<std::size_t>(y[i])]));
  }
  return w;
}

MultinomialObjective::MultinomialObjective(const Matrix& x, std::span<const int> y,
                                           std::size_t num_classes, const Hyperparameters& hyper)
    : x_(x), k_(num_classes), d_(static_cast<std::size_t>(x.cols())), hyper_(hyper) {
  const auto n = static_cast<Eigen::Index>(y.size());
  require(x.rows() == n, ErrorCode::invalid_input, "feature rows and labels differ in length");
  require(n > 0, ErrorCode::invalid_input, "cannot fit on an empty dataset");
  targets_ = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k_));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    require(c >= 0 && static_cast<std::size_t>(c) < k_, ErrorCode::invalid_input,
            "label index out of range");
    targets_(i, c) = 1.0;
  }
  const auto weights = instance_weights(y, k_, hyper.class_weighting);
  w_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w_(i) = weights[static_cast<std::size_t>(i)] / static_cast<double>(n);
  }
}

double MultinomialObjective::l1_strength() const {
  if (hyper_.penalty != Penalty::l1) return 0.0;
  return 1.0 / (hyper_.inverse_reg_strength * static_cast<double>(x_.rows()));
}

std::vector<bool> MultinomialObjective::penalized() const {
  std::vector<bool> mask(num_params(), false);
  for (std::size_t i = 0; i < k_ * d_; ++i) mask[i] = true;
  return mask;
}

Vector MultinomialObjective::pack(const Eigen::MatrixXd& weights, const Vector& bias) const {
  Vector params(static_cast<Eigen::Index>(num_params()));
  for (std::size_t k = 0; k < k_; ++k) {
    for (std::size_t j = 0; j < d_; ++j) {
      params(static_cast<Eigen::Index>(k * d_ + j)) =
          weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
  }
  params.tail(static_cast<Eigen::Index>(k_)) = bias;
  return params;
}

void MultinomialObjective::unpack(const Vector& params, Eigen::MatrixXd& weights,
                                  Vector& bias) const {
  weights.resize(static_cast<Eigen::Index>(k_), static_cast<Eigen::Index>(d_));
  for (std::size_t k = 0; k < k_; ++k) {
    for (std::size_t j = 0; j < d_; ++j) {
      weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          params(static_cast<Eigen::Index>(k * d_ + j));
    }
  }
  bias = params.tail(static_cast<Eigen::Index>(k_));
}

double MultinomialObjective::operator()(const Vector& params, Vector& grad) const {
  const auto k = static_cast<Eigen::Index>(k_);
  const auto d = static_cast<Eigen::Index>(d_);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> weights(
      params.data(), k, d);
  const auto bias = params.tail(k);

  Eigen::MatrixXd logits = x_ * weights.transpose();
  logits.rowwise() += bias.transpose();

  double loss = 0.0;
  Eigen::MatrixXd residual(logits.rows(), k);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    auto e = (logits.row(i).array() - m).exp();
    const double z = e.sum();
    const double lse = m + std::log(z);
    loss += w_(i) * (lse - logits.row(i).dot(targets_.row(i)));
    residual.row(i) = w_(i) * (e / z - targets_.row(i).array()).matrix();
  }

  grad.resize(params.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> grad_w(
      grad.data(), k, d);
  grad_w.noalias() = residual.transpose() * x_;
  grad.tail(k) = residual.colwise().sum().transpose();

  if (hyper_.penalty == Penalty::l2) {
    const double lambda = 1.0 / (hyper_.inverse_reg_strength * static_cast<double>(x_.rows()));
    loss += 0.5 * lambda * weights.squaredNorm();
    grad_w += lambda * weights;
  }
  return loss;
}

LinearModel fit_multinomial(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                            const Hyperparameters& hyper, std::uint64_t seed) {
  require(x.allFinite(), ErrorCode::invalid_input, "training features contain non-finite values");
  require(hyper.inverse_reg_strength > 0.0 && std::isfinite(hyper.inverse_reg_strength),
          ErrorCode::invalid_input, "inverse regularization strength must be positive");
  require(hyper.max_iterations > 0 && hyper.convergence_tolerance > 0.0, ErrorCode::invalid_input,
          "iteration limit and tolerance must be positive");
  require(num_classes >= 2, ErrorCode::degenerate_labels, "need at least two classes");
  std::set<int> distinct(y.begin(), y.end());
  require(distinct.size() >= 2, ErrorCode::degenerate_labels,
          "training labels contain fewer than two distinct classes");

  MultinomialObjective objective(x, y, num_classes, hyper);
  OptimizerOptions options;
  options.max_iterations = hyper.max_iterations;
  options.tolerance = hyper.convergence_tolerance;
  const Vector start = Vector::Zero(static_cast<Eigen::Index>(objective.num_params()));
  const auto result = minimize(
      [&objective](const Vector& p, Vector& g) { return objective(p, g); }, start,
      objective.l1_strength(), objective.penalized(), options);

  LinearModel model;
  objective.unpack(result.x, model.weights, model.bias);
  model.hyper = hyper;
  model.seed = seed;
  model.converged = result.converged;
  model.iterations = result.iterations;
  return model;
}

double log_loss(const LinearModel& model, const Matrix& x, std::span<const int> y) {
  const Matrix p = predict_proba_batch(model, x);
  require(static_cast<std::size_t>(p.rows()) == y.size() && !y.empty(), ErrorCode::invalid_input,
          "log loss needs one label per row");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total -= std::log(std::max(p(static_cast<Eigen::Index>(i), y[i]), 1e-300));
  }
  return total / static_cast<double>(y.size());
}

}  // namespace hfq
