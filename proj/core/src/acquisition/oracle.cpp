#include "hfq/acquisition/oracle.hpp"

#include "hfq/acquisition/marginal.hpp"
#include "hfq/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hfq {
namespace {

double cross_entropy(const Vector& p, int label) {
  return -std::log(std::max(p(label), std::numeric_limits<double>::min()));
}

}  // namespace

double marginal_loss(const JointModel& model, const ConditionalModels& cond,
                     const Eigen::Ref<const Vector>& x_machine,
                     const Eigen::Ref<const Vector>& x_human, int label, const QueryMask& mask) {
  require(label >= 0 && static_cast<std::size_t>(label) < model.num_classes(), ErrorCode::invalid_input,
          "label out of range");
  const Vector p = predict_marginal(model, cond, x_machine, answers_from(x_human, mask), MarginalMode::exact());
  return cross_entropy(p, label);
}

OracleResult brute_force_best_mask(const JointModel& model, const ConditionalModels& cond,
                                   const Eigen::Ref<const Vector>& x_machine,
                                   const Eigen::Ref<const Vector>& x_human, int label,
                                   std::size_t budget) {
  const std::size_t dh = static_cast<std::size_t>(model.theta_h.cols());
  require(dh <= kMaxOracleHumanDim, ErrorCode::capacity,
          "brute-force mask search supports at most " + std::to_string(kMaxOracleHumanDim) +
              " human dimensions, got " + std::to_string(dh));
  require(static_cast<std::size_t>(x_human.size()) == dh, ErrorCode::invalid_input,
          "human vector length does not match the model");
  require(label >= 0 && static_cast<std::size_t>(label) < model.num_classes(), ErrorCode::invalid_input,
          "label out of range");
  const Marginalizer marginalizer(model, cond, x_machine);
  const std::size_t max_pop = std::min(budget, dh);

  OracleResult best;
  best.loss = std::numeric_limits<double>::infinity();
  bool have = false;
  // Popcount-major, then lexicographic over the sorted index list.
  std::vector<std::size_t> combo;
  for (std::size_t pop = 0; pop <= max_pop; ++pop) {
    combo.resize(pop);
    for (std::size_t i = 0; i < pop; ++i) combo[i] = i;
    for (;;) {
      QueryMask mask(dh, budget);
      for (std::size_t d : combo) mask.bits[d] = 1;
      const Vector p = marginalizer.predict(answers_from(x_human, mask), MarginalMode::exact());
      const double loss = cross_entropy(p, label);
      if (!have || loss < best.loss) {
        best.loss = loss;
        best.mask = mask;
        have = true;
      }
      // Next combination of `pop` indices out of dh.
      std::size_t i = pop;
      while (i > 0 && combo[i - 1] == dh - pop + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < pop; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return best;
}

}  // namespace hfq
