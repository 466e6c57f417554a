#pragma once

#include "hfq/acquisition/marginal.hpp"
#include "hfq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hfq {

enum class RankingSource { forward_selection, plausible_classes, surprising_features };

std::string_view to_string(RankingSource s) noexcept;

// Ordered human-dimension indices with the score that placed each one.
struct FeatureRanking {
  std::vector<std::size_t> dims;
  std::vector<double> scores;
  RankingSource source = RankingSource::forward_selection;

  // Unique, in range, length <= human_dim.
  void validate(std::size_t human_dim) const;

  // First b entries as a query mask.
  std::vector<std::size_t> prefix(std::size_t b) const;
};

// Upper bound: one model over [X^m, X^h], grid-searched on validation macro-F1.
JointModel train_all_features(const Dataset& train, const Dataset& valid,
                              std::span<const Hyperparameters> grid, std::uint64_t seed);

// Baseline that never sees X^h.
LinearModel train_machine_only(const Dataset& train, const Dataset& valid,
                               std::span<const Hyperparameters> grid, std::uint64_t seed);

struct ForwardSelectionOptions {
  // Reuse the previous step's best hyperparameters instead of the full grid.
  bool reuse_hyperparameters = false;
  std::size_t threads = 0;
};

// Dataset-level greedy forward selection of `budget` human features: each
// step retrains on X^m plus the selected features plus one candidate and
// keeps the candidate with the best validation macro-F1 (lowest index on
// ties). Scores are the validation macro-F1 after each addition.
FeatureRanking forward_feature_selection(const Dataset& train, const Dataset& valid,
                                         std::span<const Hyperparameters> grid,
                                         std::size_t budget, std::uint64_t seed,
                                         const ForwardSelectionOptions& options = {});

// Ranks human dimensions by max over plausible classes (p_k > 1/K under the
// no-answer marginal prediction; all classes when none qualifies) of
// |theta_h[k, d]|, descending.
FeatureRanking plausible_classes_rank(const JointModel& model, const ConditionalModels& cond,
                                      const Eigen::Ref<const Vector>& x_machine,
                                      const MarginalMode& mode);

// Same ranking given a precomputed machine-only class distribution.
FeatureRanking plausible_classes_rank(const JointModel& model,
                                      const Eigen::Ref<const Vector>& class_probabilities);

// Ranks human dimensions ascending by |0.5 - p(x^h_d = 1 | x^m)|.
FeatureRanking surprising_features_rank(const ConditionalModels& cond,
                                        const Eigen::Ref<const Vector>& x_machine);

// Structured-text export: [{"name": ..., "index": ..., "score": ...}, ...].
std::string serialize(const FeatureRanking& ranking, const FeatureSpace& space);
FeatureRanking parse_feature_ranking(std::string_view text, const FeatureSpace& space);

}  // namespace hfq
