#include "hfq/data/birds.hpp"

#include "../detail/json_util.hpp"
#include "hfq/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace hfq {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return trim(pos == std::string::npos ? line : line.substr(0, pos));
}

}  // namespace

BirdTable parse_bird_tables(std::string_view attributes_csv, std::string_view labels_csv) {
  const auto label_lines = lines_of(labels_csv);
  require(!label_lines.empty(), ErrorCode::parse, "label table is empty");
  std::map<std::string, std::string> labels;
  for (std::size_t i = 1; i < label_lines.size(); ++i) {
    const auto f = split_csv(label_lines[i]);
    require(f.size() == 2, ErrorCode::parse, "label table line " + std::to_string(i + 1) + ": expected 2 fields");
    labels[f[0]] = f[1];
  }

  const auto lines = lines_of(attributes_csv);
  require(!lines.empty(), ErrorCode::parse, "attribute table is empty");
  BirdTable table;
  const auto header = split_csv(lines[0]);
  require(header.size() >= 2, ErrorCode::parse, "attribute table header needs an id column and attributes");
  table.attribute_names.assign(header.begin() + 1, header.end());

  std::vector<std::string> unlabeled;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    require(f.size() == header.size(), ErrorCode::parse,
            "attribute table line " + std::to_string(i + 1) + ": expected " + std::to_string(header.size()) + " fields");
    RawBirdRecord rec;
    rec.id = f[0];
    auto it = labels.find(rec.id);
    if (it == labels.end()) {
      unlabeled.push_back(rec.id);
      continue;
    }
    rec.label = it->second;
    for (std::size_t j = 1; j < f.size(); ++j) {
      double v = 0.0;
      const auto* b = f[j].data();
      auto [p, ec] = std::from_chars(b, b + f[j].size(), v);
      require(ec == std::errc() && p == b + f[j].size(), ErrorCode::parse,
              "attribute table line " + std::to_string(i + 1) + ": bad number '" + f[j] + "'");
      require(v >= 0.0 && v <= 1.0, ErrorCode::record,
              "image " + rec.id + ": attribute value " + f[j] + " outside [0, 1]");
      rec.values.push_back(v);
    }
    table.records.push_back(std::move(rec));
  }
  if (!unlabeled.empty()) {
    std::string msg = std::to_string(unlabeled.size()) + " image(s) without a label:";
    for (std::size_t i = 0; i < unlabeled.size() && i < 20; ++i) msg += " " + unlabeled[i];
    fail(ErrorCode::record, msg);
  }
  return table;
}

BirdTable ingest_birds(const std::filesystem::path& attributes, const std::filesystem::path& labels) {
  return parse_bird_tables(detail::read_text_file(attributes), detail::read_text_file(labels));
}

std::vector<std::string> parse_word_list(std::string_view text) {
  std::vector<std::string> words;
  for (const auto& line : lines_of(text)) {
    auto w = strip_comment(line);
    if (!w.empty()) words.push_back(lower(w));
  }
  return words;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  return parse_word_list(detail::read_text_file(path));
}

std::map<std::string, std::string> parse_label_mapping(std::string_view text) {
  std::map<std::string, std::string> m;
  for (const auto& raw : lines_of(text)) {
    const auto line = strip_comment(raw);
    if (line.empty()) continue;
    auto pos = line.find('\t');
    if (pos == std::string::npos) pos = line.find(',');
    require(pos != std::string::npos, ErrorCode::parse, "label mapping line without separator: " + line);
    m[trim(line.substr(0, pos))] = trim(line.substr(pos + 1));
  }
  return m;
}

std::string coarse_label(const std::string& fine, const std::map<std::string, std::string>& mapping) {
  if (auto it = mapping.find(fine); it != mapping.end()) return it->second;
  std::string name = fine;
  if (auto dot = name.find('.'); dot != std::string::npos &&
                                 std::all_of(name.begin(), name.begin() + static_cast<std::ptrdiff_t>(dot),
                                             [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    name = name.substr(dot + 1);
  }
  if (auto us = name.rfind('_'); us != std::string::npos) name = name.substr(us + 1);
  return name;
}

bool matches_lexicon(std::string_view attribute, const std::vector<std::string>& lexicon) {
  std::string token;
  auto check = [&]() {
    if (token.empty()) return false;
    const bool hit = std::find(lexicon.begin(), lexicon.end(), lower(token)) != lexicon.end();
    token.clear();
    return hit;
  };
  for (char c : attribute) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
      token.push_back(c);
    } else if (check()) {
      return true;
    }
  }
  return check();
}

PreprocessedDataset preprocess_birds(const BirdTable& table, const std::vector<std::string>& color_lexicon,
                                     std::uint64_t /*seed*/, const BirdOptions& options) {
  require(!table.records.empty(), ErrorCode::empty_dataset, "no bird records");
  require(!color_lexicon.empty(), ErrorCode::invalid_input, "color lexicon is empty");
  const std::size_t a = table.attribute_names.size();

  std::map<std::string, std::size_t> class_counts;
  std::vector<std::string> coarse(table.records.size());
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    require(table.records[i].values.size() == a, ErrorCode::record,
            "image " + table.records[i].id + " has the wrong number of attributes");
    coarse[i] = coarse_label(table.records[i].label, options.label_mapping);
    ++class_counts[coarse[i]];
  }
  std::vector<std::string> classes;
  for (const auto& [name, count] : class_counts) {
    if (count >= options.min_class_count) classes.push_back(name);
  }
  require(classes.size() >= 2, ErrorCode::empty_dataset, "fewer than two classes survive class pruning");
  std::map<std::string, int> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c) class_index[classes[c]] = static_cast<int>(c);

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    if (class_index.count(coarse[i])) kept.push_back(i);
  }
  std::vector<std::size_t> positives(a, 0);
  for (auto i : kept) {
    for (std::size_t j = 0; j < a; ++j) positives[j] += table.records[i].values[j] >= options.threshold;
  }

  PreprocessedDataset out;
  SplitSpec& split = out.split;
  split.rule = SplitSpec::Rule::color_lexicon;
  split.lexicon = color_lexicon;
  std::vector<std::size_t> machine_attr, human_attr;
  for (std::size_t j = 0; j < a; ++j) {
    if (positives[j] < options.min_positive) continue;
    const std::size_t idx = split.features.size();
    split.features.push_back(table.attribute_names[j]);
    if (matches_lexicon(table.attribute_names[j], color_lexicon)) {
      split.human_indices.push_back(idx);
      human_attr.push_back(j);
    } else {
      split.machine_indices.push_back(idx);
      machine_attr.push_back(j);
    }
  }
  split.validate();
  require(!machine_attr.empty() && !human_attr.empty(), ErrorCode::empty_dataset,
          "pruning left an empty machine or human block");

  Dataset& d = out.data;
  for (auto j : machine_attr) d.space.machine_names.push_back(table.attribute_names[j]);
  for (auto j : human_attr) d.space.human_names.push_back(table.attribute_names[j]);
  d.space.class_names = classes;
  const auto n = static_cast<Eigen::Index>(kept.size());
  d.x_machine.resize(n, static_cast<Eigen::Index>(machine_attr.size()));
  d.x_human.resize(n, static_cast<Eigen::Index>(human_attr.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = table.records[kept[static_cast<std::size_t>(r)]];
    for (std::size_t j = 0; j < machine_attr.size(); ++j) {
      d.x_machine(r, static_cast<Eigen::Index>(j)) = rec.values[machine_attr[j]] >= options.threshold ? 1.0 : 0.0;
    }
    for (std::size_t j = 0; j < human_attr.size(); ++j) {
      d.x_human(r, static_cast<Eigen::Index>(j)) = rec.values[human_attr[j]] >= options.threshold ? 1.0 : 0.0;
    }
    d.labels.push_back(class_index.at(coarse[kept[static_cast<std::size_t>(r)]]));
  }
  d.validate(true);
  return out;
}

}  // namespace hfq
