#pragma once

#include "hfq/types.hpp"

#include <cstddef>
#include <vector>

namespace hfq {

// Single-feature rule: predict class 1 iff (value > threshold) == above.
struct ThresholdRule {
  std::size_t feature = 0;  // 0 = machine (x), 1 = human (y)
  double threshold = 0.0;
  bool above = true;
  std::size_t correct = 0;
  std::vector<std::size_t> errors;  // row indices
};

struct ToyReport {
  std::size_t num_points = 0;
  std::size_t joint_correct = 0;
  // Decision rules of logistic fits on one feature each.
  ThresholdRule machine_rule;
  ThresholdRule human_rule;
  bool identical_errors = false;
  // Mixtures w * machine + (1 - w) * human of the two hard predictions, w on
  // an even grid over [0, 1], predicted 1 iff the mixture exceeds 0.5.
  std::size_t mixtures_checked = 0;
  std::size_t mixtures_fixing_any_shared_error = 0;
  // Highest accuracy of any threshold on each feature alone.
  std::size_t best_machine_threshold_correct = 0;
  std::size_t best_human_threshold_correct = 0;
};

ThresholdRule fit_single_feature_rule(const Dataset& data, std::size_t feature);

// Every threshold between consecutive distinct values (and outside the
// range), both orientations.
std::vector<ThresholdRule> enumerate_threshold_rules(const Dataset& data, std::size_t feature);

ToyReport analyze_toy(const Dataset& toy, std::size_t weight_grid = 101);

}  // namespace hfq
