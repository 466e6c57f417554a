#pragma once

#include "hfq/acquisition/retrain.hpp"
#include "hfq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hfq {

inline constexpr int kModelSchemaVersion = 1;

// Everything the acquisition loop needs for one dataset: the joint
// prediction function, the conditional feature models and optionally one
// retrained masked model per budget level.
struct ModelBundle {
  std::string name;
  JointModel joint;
  ConditionalModels conditionals;
  std::vector<MaskedModel> masked;

  // Masked model trained at exactly `budget`, or nullptr.
  const MaskedModel* masked_for(std::size_t budget) const;
  void validate() const;
};

// Self-describing JSON documents. Doubles are written in shortest
// round-trip form, so parse(serialize(m)) reproduces every parameter
// bit-for-bit.
std::string serialize(const ModelBundle& bundle);
ModelBundle parse_model_bundle(std::string_view text);

std::string serialize(const JointModel& model);
JointModel parse_joint_model(std::string_view text);

void save_model_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model_bundle(const std::filesystem::path& path);

}  // namespace hfq
