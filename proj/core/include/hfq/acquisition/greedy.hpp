#pragma once

#include "hfq/acquisition/marginal.hpp"
#include "hfq/acquisition/query.hpp"
#include "hfq/types.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace hfq {

// Answers a query for human dimension d. Must return 0 or 1.
using Responder = std::function<int(std::size_t d)>;

struct AcquisitionStep {
  std::size_t dimension = 0;
  std::vector<CandidateScore> candidates;  // empty for free-choice steps
  int answer = 0;
  Vector prediction;  // marginal prediction after the answer
  bool free_choice = false;
};

struct AcquisitionTrace {
  Vector initial_prediction;
  std::vector<AcquisitionStep> steps;

  std::vector<std::size_t> query_order() const;
};

struct AcquisitionResult {
  QueryMask mask;
  AnswerSet answers;
  AcquisitionTrace trace;
  std::vector<std::string> warnings;
};

struct Selection {
  std::size_t dimension = 0;
  double expected_entropy = 0.0;
  std::vector<CandidateScore> candidates;
};

// Candidates within this many nats of the minimum are tied.
inline constexpr double kEntropyTieTolerance = 1e-12;

// Argmin of the candidate table for the current state, lowest index on ties.
// Uses mode.at_stage(answers.size()).
Selection select_next_query(const Marginalizer& marginalizer, const AnswerSet& answers,
                            const MarginalMode& mode);

// Greedy expected-entropy acquisition. A budget above D_h is clamped with a
// warning.
AcquisitionResult greedy_acquire(const JointModel& model, const ConditionalModels& cond,
                                 const Eigen::Ref<const Vector>& x_machine,
                                 const Responder& responder, std::size_t budget,
                                 const MarginalMode& mode);

AcquisitionResult greedy_acquire(const Marginalizer& marginalizer, const Responder& responder,
                                 std::size_t budget, const MarginalMode& mode);

// Responder reading answers from a full ground-truth vector.
Responder oracle_responder(const Eigen::Ref<const Vector>& x_human);

}  // namespace hfq
