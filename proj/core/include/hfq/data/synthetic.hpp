#pragma once

#include "hfq/types.hpp"

#include <cstdint>

namespace hfq {

// Six continuous 2-D points, label 1 iff y > x. x is the machine feature
// and y the human feature. Dataset::binary is false.
Dataset make_toy_fig1();

struct PlantedOptions {
  std::size_t n = 2000;
  std::size_t machine_dim = 10;
  std::size_t human_dim = 20;
  std::size_t relevant = 2;
  std::size_t num_classes = 4;
  std::size_t max_contexts = 4;
  double human_signal = 3.0;
  double machine_signal = 1.0;
  double inactive_rate = 0.03;
};

// Context-dependent human-feature relevance. See docs/planted.md.
Dataset make_planted(const PlantedOptions& options, std::uint64_t seed);

}  // namespace hfq
