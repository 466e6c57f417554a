#pragma once

#include "hfq/acquisition/marginal.hpp"
#include "hfq/model_io.hpp"
#include "hfq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hfq {

struct BundleOptions {
  std::vector<Hyperparameters> grid = default_grid();
  std::vector<Hyperparameters> conditional_grid = default_grid();
  // Masked models for budgets 1..masked_budget; 0 skips retraining.
  std::size_t masked_budget = 0;
  MarginalMode mode = MarginalMode::monte_carlo(5000, 0);
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

// Joint model, conditionals and optional masked models from a train/valid pair.
ModelBundle train_bundle(const std::string& name, const Dataset& train, const Dataset& valid,
                         const BundleOptions& options);

}  // namespace hfq
