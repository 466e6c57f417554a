#include "hfq/acquisition/retrain.hpp"

#include "hfq/acquisition/greedy.hpp"
#include "hfq/error.hpp"
#include "hfq/grid_search.hpp"
#include "hfq/multinomial.hpp"
#include "hfq/parallel.hpp"

namespace hfq {

void MaskedModel::validate() const {
  const auto k = phi_bar.size();
  require(k >= 2 && theta_m_bar.rows() == k && theta_h_bar.rows() == k, ErrorCode::invalid_input,
          "masked model shapes are inconsistent");
  require(theta_m_bar.allFinite() && theta_h_bar.allFinite() && phi_bar.allFinite(),
          ErrorCode::invalid_input, "masked model has non-finite parameters");
}

Matrix TrainMasks::mask(std::size_t b) const {
  require(b <= budget, ErrorCode::invalid_input, "mask budget exceeds the computed query orders");
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(orders.size()), static_cast<Eigen::Index>(human_dim));
  for (std::size_t n = 0; n < orders.size(); ++n) {
    for (std::size_t j = 0; j < b && j < orders[n].size(); ++j) {
      q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(orders[n][j])) = 1.0;
    }
  }
  return q;
}

TrainMasks compute_train_masks(const JointModel& model, const ConditionalModels& cond,
                               const Dataset& data, std::size_t budget,
                               const MarginalMode& mode, std::size_t threads) {
  TrainMasks out;
  out.human_dim = data.space.human_dim();
  out.budget = std::min(budget, out.human_dim);
  out.orders.resize(data.size());
  parallel_for(
      data.size(),
      [&](std::size_t n) {
        const auto row = static_cast<Eigen::Index>(n);
        const Vector xm = data.x_machine.row(row).transpose();
        const Vector xh = data.x_human.row(row).transpose();
        auto result = greedy_acquire(model, cond, xm, oracle_responder(xh), out.budget, mode.derived(n));
        out.orders[n] = result.trace.query_order();
      },
      threads);
  return out;
}

namespace {

Matrix masked_features(const Dataset& data, const Matrix& mask) {
  require(mask.rows() == data.x_human.rows() && mask.cols() == data.x_human.cols(),
          ErrorCode::invalid_input, "query mask shape does not match the human block");
  Matrix x(data.x_machine.rows(), data.x_machine.cols() + data.x_human.cols());
  x << data.x_machine, data.x_human.cwiseProduct(mask);
  return x;
}

}  // namespace

MaskedModel retrain_masked(const Dataset& train, const Matrix& train_mask, const Dataset& valid,
                           const Matrix& valid_mask, std::span<const Hyperparameters> grid,
                           std::size_t budget, std::uint64_t seed) {
  const Matrix xt = masked_features(train, train_mask);
  const Matrix xv = masked_features(valid, valid_mask);
  const auto fit = grid_search(xt, train.labels, xv, valid.labels, train.space.num_classes(), grid,
                               SelectionObjective::macro_f1, seed);
  const auto dm = train.x_machine.cols();
  const auto dh = train.x_human.cols();
  MaskedModel m;
  m.theta_m_bar = fit.model.weights.leftCols(dm);
  m.theta_h_bar = fit.model.weights.rightCols(dh);
  m.phi_bar = fit.model.bias;
  m.trained_budget = budget;
  m.hyper = fit.best;
  m.seed = seed;
  return m;
}

Vector predict_zero(const MaskedModel& model, const Eigen::Ref<const Vector>& x_machine,
                    const AnswerSet& answers) {
  require(x_machine.size() == model.theta_m_bar.cols(), ErrorCode::invalid_input,
          "machine vector length does not match the masked model");
  require(answers.human_dim() == static_cast<std::size_t>(model.theta_h_bar.cols()),
          ErrorCode::invalid_input, "answer set does not match the masked model");
  Vector logits = model.theta_m_bar * x_machine + model.phi_bar;
  for (std::size_t d : answers.dims()) {
    if (answers.value(d) == 1) logits += model.theta_h_bar.col(static_cast<Eigen::Index>(d));
  }
  return softmax(logits);
}

}  // namespace hfq
