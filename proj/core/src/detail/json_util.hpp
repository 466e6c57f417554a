#pragma once

#include "hfq/error.hpp"
#include "hfq/types.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace hfq::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::parse, std::string(what) + ": malformed JSON at line " + std::to_string(line) +
                               ", column " + std::to_string(col) + " (byte " + std::to_string(e.byte) +
                               ")");
  }
}

template <typename Derived>
json flatten(const Eigen::DenseBase<Derived>& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

inline Eigen::MatrixXd unflatten(const json& arr, Eigen::Index rows, Eigen::Index cols,
                                 std::string_view what) {
  require(arr.is_array() && arr.size() == static_cast<std::size_t>(rows * cols), ErrorCode::parse,
          std::string(what) + ": expected " + std::to_string(rows * cols) + " values");
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = arr.at(i++).get<double>();
  }
  return m;
}

inline Vector vector_from(const json& arr, Eigen::Index n, std::string_view what) {
  require(arr.is_array() && arr.size() == static_cast<std::size_t>(n), ErrorCode::parse,
          std::string(what) + ": expected " + std::to_string(n) + " values");
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = arr.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

inline json to_json(const Hyperparameters& h) {
  return {{"penalty", std::string(to_string(h.penalty))},
          {"inverse_reg_strength", h.inverse_reg_strength},
          {"class_weighting", std::string(to_string(h.class_weighting))},
          {"max_iterations", h.max_iterations},
          {"convergence_tolerance", h.convergence_tolerance}};
}

inline Hyperparameters hyper_from(const json& j) {
  Hyperparameters h;
  h.penalty = parse_penalty(j.at("penalty").get<std::string>());
  h.inverse_reg_strength = j.at("inverse_reg_strength").get<double>();
  h.class_weighting = parse_class_weighting(j.at("class_weighting").get<std::string>());
  h.max_iterations = j.at("max_iterations").get<int>();
  h.convergence_tolerance = j.at("convergence_tolerance").get<double>();
  return h;
}

inline json to_json(const FeatureSpace& s) {
  return {{"machine", s.machine_names}, {"human", s.human_names}, {"classes", s.class_names}};
}

inline FeatureSpace space_from(const json& j) {
  FeatureSpace s;
  s.machine_names = j.at("machine").get<std::vector<std::string>>();
  s.human_names = j.at("human").get<std::vector<std::string>>();
  s.class_names = j.at("classes").get<std::vector<std::string>>();
  return s;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorCode::io, "failed writing " + path.string());
}

// Runs `body`, turning JSON access errors into parse errors.
template <typename F>
auto guarded(std::string_view what, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string(what) + ": " + e.what());
  }
}

}  // namespace hfq::detail
