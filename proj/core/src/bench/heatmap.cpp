#include "hfq/bench/heatmap.hpp"

#include "hfq/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace hfq {

QueryHeatmap query_heatmap(const std::vector<InstanceTrace>& traces, const Dataset& data,
                           std::size_t top) {
  const std::size_t dh = data.space.human_dim();
  const std::size_t dm = data.space.machine_dim();
  std::vector<std::size_t> counts(dh, 0);
  for (const auto& t : traces) {
    require(t.instance < data.size(), ErrorCode::invalid_input, "trace instance out of range");
    for (auto d : t.trace.query_order()) {
      require(d < dh, ErrorCode::invalid_input, "trace dimension out of range");
      ++counts[d];
    }
  }
  std::vector<std::size_t> order(dh);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return counts[a] > counts[b]; });
  order.resize(std::min(top, dh));
  // Features nobody asked about carry no information.
  while (!order.empty() && counts[order.back()] == 0) order.pop_back();

  QueryHeatmap h;
  h.human_dims = order;
  h.column_names = data.space.machine_names;
  std::vector<std::size_t> observed(dm, 0);
  std::vector<std::vector<std::size_t>> joint(order.size(), std::vector<std::size_t>(dm, 0));
  for (const auto& t : traces) {
    const auto row = data.x_machine.row(static_cast<Eigen::Index>(t.instance));
    const auto queried = t.trace.query_order();
    for (std::size_t m = 0; m < dm; ++m) {
      if (row(static_cast<Eigen::Index>(m)) != 1.0) continue;
      ++observed[m];
      for (std::size_t r = 0; r < order.size(); ++r) {
        if (std::find(queried.begin(), queried.end(), order[r]) != queried.end()) ++joint[r][m];
      }
    }
  }
  for (std::size_t r = 0; r < order.size(); ++r) {
    h.row_names.push_back(data.space.human_names[order[r]]);
    h.query_counts.push_back(counts[order[r]]);
    std::vector<std::optional<double>> values(dm);
    for (std::size_t m = 0; m < dm; ++m) {
      if (observed[m] > 0) values[m] = static_cast<double>(joint[r][m]) / static_cast<double>(observed[m]);
    }
    h.values.push_back(std::move(values));
  }
  return h;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string QueryHeatmap::to_csv() const {
  std::ostringstream out;
  out << "human_feature,times_queried";
  for (const auto& c : column_names) out << "," << csv_field(c);
  out << "\n";
  for (std::size_t r = 0; r < row_names.size(); ++r) {
    out << csv_field(row_names[r]) << "," << query_counts[r];
    for (const auto& v : values[r]) {
      out << ",";
      if (v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", *v);
        out << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace hfq
