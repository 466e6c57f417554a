#include "hfq/acquisition/greedy.hpp"

#include "hfq/error.hpp"

#include <algorithm>
#include <string>

namespace hfq {

std::vector<std::size_t> AcquisitionTrace::query_order() const {
  std::vector<std::size_t> order;
  order.reserve(steps.size());
  for (const auto& s : steps) order.push_back(s.dimension);
  return order;
}

Selection select_next_query(const Marginalizer& marginalizer, const AnswerSet& answers,
                            const MarginalMode& mode) {
  Selection sel;
  sel.candidates = marginalizer.candidate_table(answers, mode.at_stage(answers.size()));
  require(!sel.candidates.empty(), ErrorCode::budget_exhausted, "every human dimension is already answered");
  double lowest = sel.candidates.front().expected_entropy;
  for (const auto& c : sel.candidates) lowest = std::min(lowest, c.expected_entropy);
  // Scores that differ only by summation rounding count as ties.
  const CandidateScore* best = &sel.candidates.front();
  for (const auto& c : sel.candidates) {
    if (c.expected_entropy <= lowest + kEntropyTieTolerance) {
      best = &c;
      break;
    }
  }
  sel.dimension = best->dimension;
  sel.expected_entropy = best->expected_entropy;
  return sel;
}

AcquisitionResult greedy_acquire(const Marginalizer& marginalizer, const Responder& responder,
                                 std::size_t budget, const MarginalMode& mode) {
  const std::size_t dh = marginalizer.human_dim();
  AcquisitionResult result;
  if (budget > dh) {
    result.warnings.push_back("budget " + std::to_string(budget) + " exceeds " + std::to_string(dh) +
                              " human dimensions; clamped");
    budget = dh;
  }
  result.answers = AnswerSet(dh);
  result.mask = QueryMask(dh, budget);
  result.trace.initial_prediction = marginalizer.predict(result.answers, mode.at_stage(0));

  for (std::size_t step = 0; step < budget; ++step) {
    Selection sel = select_next_query(marginalizer, result.answers, mode);
    const int value = responder(sel.dimension);
    require(value == 0 || value == 1, ErrorCode::invalid_answer,
            "responder returned " + std::to_string(value) + " for dimension " +
                std::to_string(sel.dimension));
    result.answers.set(sel.dimension, value);
    result.mask.bits[sel.dimension] = 1;

    AcquisitionStep s;
    s.dimension = sel.dimension;
    s.candidates = std::move(sel.candidates);
    s.answer = value;
    s.prediction = marginalizer.predict(result.answers, mode.at_stage(result.answers.size()));
    result.trace.steps.push_back(std::move(s));
  }
  return result;
}

AcquisitionResult greedy_acquire(const JointModel& model, const ConditionalModels& cond,
                                 const Eigen::Ref<const Vector>& x_machine,
                                 const Responder& responder, std::size_t budget,
                                 const MarginalMode& mode) {
  const Marginalizer marginalizer(model, cond, x_machine);
  return greedy_acquire(marginalizer, responder, budget, mode);
}

Responder oracle_responder(const Eigen::Ref<const Vector>& x_human) {
  Vector truth = x_human;
  return [truth = std::move(truth)](std::size_t d) {
    require(d < static_cast<std::size_t>(truth.size()), ErrorCode::invalid_input,
            "oracle asked for dimension out of range");
    return static_cast<int>(truth(static_cast<Eigen::Index>(d)));
  };
}

}  // namespace hfq
