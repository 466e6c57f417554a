#include "hfq/data/split.hpp"

#include "hfq/error.hpp"
#include "hfq/random.hpp"

#include <algorithm>

namespace hfq {

DataSplits stratified_split(const Dataset& data, std::uint64_t seed) {
  const std::size_t k = data.space.num_classes();
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < k; ++c) {
    require(by_class[c].size() >= 3, ErrorCode::stratification,
            "class '" + data.space.class_names[c] + "' has " + std::to_string(by_class[c].size()) +
                " instances; stratified splitting needs at least 3");
  }

  Rng rng(seed);
  DataSplits out;
  for (std::size_t c = 0; c < k; ++c) {
    auto rows = by_class[c];
    rng.shuffle(rows);
    const std::size_t n = rows.size();
    std::size_t n_train = 2 * n / 3;
    std::size_t n_valid = n / 6;
    std::size_t n_test = n / 6;
    // Leftover rows go to train first, then validation.
    std::size_t rest = n - n_train - n_valid - n_test;
    if (rest > 0) {
      ++n_train;
      --rest;
    }
    if (rest > 0) {
      ++n_valid;
      --rest;
    }
    n_test += rest;
    if (n_valid == 0) {
      n_valid = 1;
      --n_train;
    }
    if (n_test == 0) {
      n_test = 1;
      --n_train;
    }
    auto it = rows.begin();
    out.train_rows.insert(out.train_rows.end(), it, it + static_cast<std::ptrdiff_t>(n_train));
    it += static_cast<std::ptrdiff_t>(n_train);
    out.valid_rows.insert(out.valid_rows.end(), it, it + static_cast<std::ptrdiff_t>(n_valid));
    it += static_cast<std::ptrdiff_t>(n_valid);
    out.test_rows.insert(out.test_rows.end(), it, rows.end());
  }
  for (auto* rows : {&out.train_rows, &out.valid_rows, &out.test_rows}) std::sort(rows->begin(), rows->end());
  out.train = data.subset(out.train_rows);
  out.valid = data.subset(out.valid_rows);
  out.test = data.subset(out.test_rows);
  return out;
}

}  // namespace hfq
