#pragma once

#include "hfq/bench/experiment.hpp"
#include "hfq/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hfq {

// P(query human feature d | machine feature m = 1) over a set of traces.
struct QueryHeatmap {
  std::vector<std::size_t> human_dims;     // rows, most queried first
  std::vector<std::size_t> query_counts;   // per row
  std::vector<std::string> row_names;
  std::vector<std::string> column_names;   // machine features
  // values[row][col]; nullopt when machine feature col never observed.
  std::vector<std::vector<std::optional<double>>> values;

  std::string to_csv() const;
};

// Rows limited to the `top` most-queried human features (ties by index);
// never-queried features are left out.
// traces[i].instance indexes rows of `data`.
QueryHeatmap query_heatmap(const std::vector<InstanceTrace>& traces, const Dataset& data,
                           std::size_t top = 20);

}  // namespace hfq
