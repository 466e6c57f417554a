#include "hfq/data/recipe.hpp"

#include "../detail/json_util.hpp"
#include "hfq/error.hpp"
#include "hfq/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace hfq {

using detail::json;

void SplitSpec::validate() const {
  std::vector<int> seen(features.size(), 0);
  for (const auto* block : {&machine_indices, &human_indices}) {
    for (auto i : *block) {
      require(i < features.size(), ErrorCode::invalid_input, "split index out of range");
      ++seen[i];
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    require(seen[i] == 1, ErrorCode::invalid_input,
            "feature '" + features[i] + "' is not in exactly one block");
  }
}

std::size_t word_count(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::size_t n = 0;
  std::string w;
  while (in >> w) ++n;
  return n;
}

std::vector<RawRecipeRecord> parse_recipe_records(std::string_view text) {
  const json doc = detail::parse_json(text, "recipe file");
  require(doc.is_array(), ErrorCode::parse, "recipe file: top level must be an array of records");
  std::vector<RawRecipeRecord> out;
  out.reserve(doc.size());
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& r = doc[i];
    const std::string who = r.is_object() && r.contains("id") ? "id " + r["id"].dump() : "record #" + std::to_string(i);
    if (!r.is_object() || !r.contains("id") || !r.contains("cuisine") || !r.contains("ingredients")) {
      std::string missing;
      for (const char* key : {"id", "cuisine", "ingredients"}) {
        if (!r.is_object() || !r.contains(key)) missing += std::string(missing.empty() ? "" : ",") + key;
      }
      bad.push_back(who + " (missing " + missing + ")");
      continue;
    }
    try {
      RawRecipeRecord rec;
      rec.id = r.at("id").get<std::int64_t>();
      if (!r.at("cuisine").is_null()) {
        auto c = r.at("cuisine").get<std::string>();
        if (!c.empty()) rec.cuisine = std::move(c);
      }
      rec.ingredients = r.at("ingredients").get<std::vector<std::string>>();
      out.push_back(std::move(rec));
    } catch (const json::exception&) {
      bad.push_back(who + " (wrong field types)");
    }
  }
  if (!bad.empty()) {
    std::string msg = "recipe file: " + std::to_string(bad.size()) + " malformed record(s): ";
    for (std::size_t i = 0; i < bad.size() && i < 20; ++i) msg += (i ? "; " : "") + bad[i];
    if (bad.size() > 20) msg += "; ...";
    fail(ErrorCode::record, msg);
  }
  return out;
}

std::vector<RawRecipeRecord> ingest_recipe(const std::filesystem::path& path) {
  return parse_recipe_records(detail::read_text_file(path));
}

PreprocessedDataset preprocess_recipe(const std::vector<RawRecipeRecord>& records,
                                      std::uint64_t seed, const RecipeOptions& options) {
  require(!records.empty(), ErrorCode::empty_dataset, "no recipe records");
  require(options.subsample_fraction > 0.0 && options.subsample_fraction <= 1.0,
          ErrorCode::invalid_input, "subsample fraction must be in (0, 1]");

  // Labelled records grouped by cuisine (sorted class order).
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].cuisine) by_class[*records[i].cuisine].push_back(i);
  }
  require(!by_class.empty(), ErrorCode::empty_dataset, "every recipe record is unlabeled");

  // Stratified subsample: round(fraction * n_c) per class, at least one.
  Rng rng(seed);
  std::vector<std::size_t> kept;
  std::vector<std::string> classes;
  for (auto& [cuisine, rows] : by_class) {
    classes.push_back(cuisine);
    auto shuffled = rows;
    rng.shuffle(shuffled);
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(options.subsample_fraction * static_cast<double>(rows.size()))));
    kept.insert(kept.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(std::min(take, rows.size())));
  }
  std::sort(kept.begin(), kept.end());

  // Positives per ingredient on the subsample.
  std::map<std::string, std::size_t> positives;
  for (auto i : kept) {
    std::set<std::string> unique(records[i].ingredients.begin(), records[i].ingredients.end());
    for (const auto& ing : unique) ++positives[ing];
  }
  SplitSpec split;
  split.rule = SplitSpec::Rule::word_count;
  split.word_threshold = options.word_threshold;
  std::vector<std::string> machine, human;
  for (const auto& [ing, count] : positives) {
    if (count < options.min_positive) continue;
    const std::size_t idx = split.features.size();
    split.features.push_back(ing);
    if (word_count(ing) >= options.word_threshold) {
      split.human_indices.push_back(idx);
      human.push_back(ing);
    } else {
      split.machine_indices.push_back(idx);
      machine.push_back(ing);
    }
  }
  split.validate();
  require(!machine.empty() && !human.empty(), ErrorCode::empty_dataset,
          "pruning left an empty machine or human block");

  std::map<std::string, Eigen::Index> machine_col, human_col;
  for (std::size_t j = 0; j < machine.size(); ++j) machine_col[machine[j]] = static_cast<Eigen::Index>(j);
  for (std::size_t j = 0; j < human.size(); ++j) human_col[human[j]] = static_cast<Eigen::Index>(j);
  std::map<std::string, int> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c) class_index[classes[c]] = static_cast<int>(c);

  PreprocessedDataset out;
  Dataset& d = out.data;
  d.space.machine_names = machine;
  d.space.human_names = human;
  d.space.class_names = classes;
  const auto n = static_cast<Eigen::Index>(kept.size());
  d.x_machine = Matrix::Zero(n, static_cast<Eigen::Index>(machine.size()));
  d.x_human = Matrix::Zero(n, static_cast<Eigen::Index>(human.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = records[kept[static_cast<std::size_t>(r)]];
    for (const auto& ing : rec.ingredients) {
      if (auto it = machine_col.find(ing); it != machine_col.end()) d.x_machine(r, it->second) = 1.0;
      if (auto it = human_col.find(ing); it != human_col.end()) d.x_human(r, it->second) = 1.0;
    }
    d.labels.push_back(class_index.at(*rec.cuisine));
  }
  out.split = std::move(split);
  d.validate(true);
  return out;
}

}  // namespace hfq
