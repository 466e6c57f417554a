#pragma once

#include "hfq/types.hpp"

#include <cstdint>
#include <vector>

namespace hfq {

struct DataSplits {
  Dataset train;
  Dataset valid;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> valid_rows;
  std::vector<std::size_t> test_rows;
};

// Class-stratified 2/3, 1/6, 1/6 split. Per class, floor(n/6) rows go to
// validation and test each and the remainder to train. Throws
// stratification when a class has fewer than 3 instances.
DataSplits stratified_split(const Dataset& data, std::uint64_t seed);

}  // namespace hfq
