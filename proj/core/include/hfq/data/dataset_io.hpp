#pragma once

#include "hfq/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace hfq {

inline constexpr int kDatasetSchemaVersion = 1;

// Canonical dataset document: schema_version, feature names per block,
// class names, row-major 0/1 matrices and label indices.
std::string serialize(const Dataset& data, std::string_view name = "");
Dataset parse_dataset(std::string_view text);

void save_dataset(const Dataset& data, const std::filesystem::path& path,
                  std::string_view name = "");
Dataset load_dataset(const std::filesystem::path& path);

// Moves the listed human dimensions (in the given order) to the end of the
// machine block.
Dataset promote_human_features(const Dataset& data, std::span<const std::size_t> human_dims);

// FNV-1a over shapes, names, matrices and labels.
std::uint64_t fingerprint(const Dataset& data);

}  // namespace hfq
