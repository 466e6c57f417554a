#pragma once

#include "hfq/data/recipe.hpp"
#include "hfq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hfq {

struct RawBirdRecord {
  std::string id;
  std::string label;
  std::vector<double> values;  // annotator agreement fractions in [0, 1]
};

struct BirdTable {
  std::vector<std::string> attribute_names;
  std::vector<RawBirdRecord> records;
};

// Attribute table: CSV with header "image_id,<attr>,<attr>,..." and one row
// per image. Label table: CSV with header "image_id,label". Rows of the
// attribute table without a label are an error.
BirdTable parse_bird_tables(std::string_view attributes_csv, std::string_view labels_csv);
BirdTable ingest_birds(const std::filesystem::path& attributes,
                       const std::filesystem::path& labels);

// One word per line; '#' starts a comment.
std::vector<std::string> parse_word_list(std::string_view text);
std::vector<std::string> load_word_list(const std::filesystem::path& path);

// "fine<TAB or ,>coarse" lines; '#' starts a comment.
std::map<std::string, std::string> parse_label_mapping(std::string_view text);

// Explicit mapping first; otherwise strip a leading "NNN." and keep the last
// '_'-separated token ("012.Yellow_headed_Blackbird" -> "Blackbird").
std::string coarse_label(const std::string& fine,
                         const std::map<std::string, std::string>& mapping);

// True when any token of the attribute name (split on characters other than
// letters, digits and '-') is in the lexicon, case-insensitively.
bool matches_lexicon(std::string_view attribute, const std::vector<std::string>& lexicon);

struct BirdOptions {
  std::size_t min_class_count = 50;
  std::size_t min_positive = 100;
  double threshold = 0.5;  // value >= threshold -> 1
  std::map<std::string, std::string> label_mapping;
};

PreprocessedDataset preprocess_birds(const BirdTable& table,
                                     const std::vector<std::string>& color_lexicon,
                                     std::uint64_t seed, const BirdOptions& options = {});

}  // namespace hfq
