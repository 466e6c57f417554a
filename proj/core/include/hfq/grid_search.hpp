#pragma once

#include "hfq/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hfq {

enum class SelectionObjective { macro_f1, log_loss };

struct GridSearchResult {
  Hyperparameters best;
  LinearModel model;
  double score = 0.0;
  std::size_t best_index = 0;
};

// Fits one model per grid point on the training split and keeps the one that
// is best on the validation split. Ties go to the earliest grid point.
GridSearchResult grid_search(const Matrix& train_x, std::span<const int> train_y,
                             const Matrix& valid_x, std::span<const int> valid_y,
                             std::size_t num_classes, std::span<const Hyperparameters> grid,
                             SelectionObjective objective, std::uint64_t seed);

}  // namespace hfq
