#pragma once

#include "hfq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hfq {

struct RawRecipeRecord {
  std::int64_t id = 0;
  std::optional<std::string> cuisine;  // null or empty counts as unlabeled
  std::vector<std::string> ingredients;
};

// How retained features were split between the machine and human blocks.
struct SplitSpec {
  enum class Rule { word_count, color_lexicon };

  Rule rule = Rule::word_count;
  std::size_t word_threshold = 2;
  std::vector<std::string> lexicon;
  std::vector<std::string> features;        // all retained features
  std::vector<std::size_t> machine_indices;  // into `features`
  std::vector<std::size_t> human_indices;

  // Disjoint and exhaustive over `features`.
  void validate() const;
};

struct PreprocessedDataset {
  Dataset data;
  SplitSpec split;
};

// Parses the Kaggle recipe file (array of {id, cuisine, ingredients}).
// Malformed JSON throws parse with line and column; records missing keys
// throw record listing the offending ids.
std::vector<RawRecipeRecord> parse_recipe_records(std::string_view text);
std::vector<RawRecipeRecord> ingest_recipe(const std::filesystem::path& path);

struct RecipeOptions {
  double subsample_fraction = 0.15;
  std::size_t min_positive = 100;
  std::size_t word_threshold = 2;
};

// Unlabeled records dropped, stratified subsample, one binary feature per
// ingredient, features with fewer than min_positive positives pruned,
// ingredients of word_threshold or more words go to the human block.
PreprocessedDataset preprocess_recipe(const std::vector<RawRecipeRecord>& records,
                                      std::uint64_t seed, const RecipeOptions& options = {});

std::size_t word_count(std::string_view s);

}  // namespace hfq
