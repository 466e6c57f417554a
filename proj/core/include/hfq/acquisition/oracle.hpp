#pragma once

#include "hfq/acquisition/query.hpp"
#include "hfq/types.hpp"

#include <cstddef>

namespace hfq {

inline constexpr std::size_t kMaxOracleHumanDim = 15;

struct OracleResult {
  QueryMask mask;
  double loss = 0.0;
};

// Cross-entropy of the true class under the exact marginal prediction that
// reveals exactly the dimensions in `mask`.
double marginal_loss(const JointModel& model, const ConditionalModels& cond,
                     const Eigen::Ref<const Vector>& x_machine,
                     const Eigen::Ref<const Vector>& x_human, int label, const QueryMask& mask);

// Label-aware exhaustive search over every mask with popcount <= budget.
// Ties go to the smaller popcount, then to the lexicographically smallest
// list of queried indices. Throws capacity when D_h > 15.
OracleResult brute_force_best_mask(const JointModel& model, const ConditionalModels& cond,
                                   const Eigen::Ref<const Vector>& x_machine,
                                   const Eigen::Ref<const Vector>& x_human, int label,
                                   std::size_t budget);

}  // namespace hfq
