#include "hfq/data/dataset_io.hpp"

#include "../detail/json_util.hpp"
#include "hfq/error.hpp"

#include <algorithm>
#include <cstring>
#include <set>

namespace hfq {

using detail::json;

namespace {

json rows_of(const Matrix& m, bool binary) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (binary) {
        row.push_back(static_cast<int>(m(r, c)));
      } else {
        row.push_back(m(r, c));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_rows(const json& rows, std::size_t n, std::size_t cols, std::string_view what) {
  require(rows.is_array() && rows.size() == n, ErrorCode::parse,
          std::string(what) + ": expected " + std::to_string(n) + " rows");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[r];
    require(row.is_array() && row.size() == cols, ErrorCode::parse,
            std::string(what) + ": row " + std::to_string(r) + " has the wrong width");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string serialize(const Dataset& data, std::string_view name) {
  data.validate(false);
  json doc = {{"schema_version", kDatasetSchemaVersion},
              {"kind", "dataset"},
              {"name", std::string(name)},
              {"binary", data.binary},
              {"features", detail::to_json(data.space)},
              {"num_instances", data.size()},
              {"x_machine", rows_of(data.x_machine, data.binary)},
              {"x_human", rows_of(data.x_human, data.binary)},
              {"labels", data.labels}};
  return doc.dump();
}

Dataset parse_dataset(std::string_view text) {
  const json doc = detail::parse_json(text, "dataset");
  return detail::guarded("dataset", [&] {
    require(doc.at("schema_version").get<int>() == kDatasetSchemaVersion, ErrorCode::parse,
            "unsupported dataset schema version");
    Dataset d;
    d.binary = doc.value("binary", true);
    d.space = detail::space_from(doc.at("features"));
    d.labels = doc.at("labels").get<Labels>();
    d.x_machine = matrix_from_rows(doc.at("x_machine"), d.labels.size(), d.space.machine_dim(), "x_machine");
    d.x_human = matrix_from_rows(doc.at("x_human"), d.labels.size(), d.space.human_dim(), "x_human");
    d.validate(false);
    return d;
  });
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, std::string_view name) {
  detail::write_text_file(path, serialize(data, name) + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(detail::read_text_file(path));
}

Dataset promote_human_features(const Dataset& data, std::span<const std::size_t> human_dims) {
  const std::size_t dh = data.space.human_dim();
  std::set<std::size_t> moved;
  for (auto d : human_dims) {
    require(d < dh, ErrorCode::invalid_input, "promoted dimension out of range");
    require(moved.insert(d).second, ErrorCode::invalid_input, "promoted dimension listed twice");
  }
  require(moved.size() < dh, ErrorCode::invalid_input, "cannot promote every human feature");

  std::vector<std::size_t> kept;
  for (std::size_t d = 0; d < dh; ++d) {
    if (!moved.count(d)) kept.push_back(d);
  }
  Dataset out;
  out.binary = data.binary;
  out.labels = data.labels;
  out.space.class_names = data.space.class_names;
  out.space.machine_names = data.space.machine_names;
  const auto n = data.x_machine.rows();
  const auto dm = data.x_machine.cols();
  out.x_machine.resize(n, dm + static_cast<Eigen::Index>(human_dims.size()));
  out.x_machine.leftCols(dm) = data.x_machine;
  for (std::size_t j = 0; j < human_dims.size(); ++j) {
    out.x_machine.col(dm + static_cast<Eigen::Index>(j)) = data.x_human.col(static_cast<Eigen::Index>(human_dims[j]));
    out.space.machine_names.push_back(data.space.human_names[human_dims[j]]);
  }
  out.x_human.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.x_human.col(static_cast<Eigen::Index>(j)) = data.x_human.col(static_cast<Eigen::Index>(kept[j]));
    out.space.human_names.push_back(data.space.human_names[kept[j]]);
  }
  return out;
}

std::uint64_t fingerprint(const Dataset& data) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  auto mix_strings = [&](const std::vector<std::string>& v) {
    for (const auto& s : v) {
      mix(s.data(), s.size());
      mix("\0", 1);
    }
  };
  mix_strings(data.space.machine_names);
  mix_strings(data.space.human_names);
  mix_strings(data.space.class_names);
  for (const Matrix* m : {&data.x_machine, &data.x_human}) {
    const Eigen::Index dims[2] = {m->rows(), m->cols()};
    mix(dims, sizeof(dims));
    mix(m->data(), static_cast<std::size_t>(m->size()) * sizeof(double));
  }
  mix(data.labels.data(), data.labels.size() * sizeof(int));
  return h;
}

}  // namespace hfq
