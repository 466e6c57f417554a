#include "hfq/pipeline.hpp"

#include "hfq/acquisition/retrain.hpp"
#include "hfq/baselines.hpp"
#include "hfq/conditional.hpp"
#include "hfq/random.hpp"

namespace hfq {

ModelBundle train_bundle(const std::string& name, const Dataset& train, const Dataset& valid,
                         const BundleOptions& options) {
  ModelBundle bundle;
  bundle.name = name;
  bundle.joint = train_all_features(train, valid, options.grid, derive_seed(options.seed, {1}));
  bundle.conditionals =
      fit_conditionals(train, valid, options.conditional_grid, derive_seed(options.seed, {3}), options.threads);
  if (options.masked_budget > 0) {
    const auto tm = compute_train_masks(bundle.joint, bundle.conditionals, train, options.masked_budget,
                                        options.mode.derived(1), options.threads);
    const auto vm = compute_train_masks(bundle.joint, bundle.conditionals, valid, options.masked_budget,
                                        options.mode.derived(2), options.threads);
    for (std::size_t b = 1; b <= tm.budget; ++b) {
      bundle.masked.push_back(
          retrain_masked(train, tm.mask(b), valid, vm.mask(b), options.grid, b, derive_seed(options.seed, {5, b})));
    }
  }
  bundle.validate();
  return bundle;
}

}  // namespace hfq
