#pragma once

#include "hfq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hfq {

// Which human dimensions were queried. popcount() <= budget.
struct QueryMask {
  std::vector<std::uint8_t> bits;
  std::size_t budget = 0;

  QueryMask() = default;
  QueryMask(std::size_t human_dim, std::size_t budget) : bits(human_dim, 0), budget(budget) {}

  std::size_t popcount() const;
  std::vector<std::size_t> dims() const;
  void validate() const;

  bool operator==(const QueryMask&) const = default;
};

// Partial assignment of human dimensions to {0,1}.
class AnswerSet {
 public:
  AnswerSet() = default;
  explicit AnswerSet(std::size_t human_dim) : values_(human_dim, -1) {}

  std::size_t human_dim() const { return values_.size(); }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool contains(std::size_t d) const;
  int value(std::size_t d) const;

  // Throws invalid_input for an out-of-range dimension, invalid_answer for a
  // non-binary value and conflict if d is already answered.
  void set(std::size_t d, int value);

  // Answered dimensions in increasing index order.
  std::vector<std::size_t> dims() const;

  // Key set of this answer set as a mask under the given budget.
  QueryMask mask(std::size_t budget) const;

  // Raw per-dimension values; -1 marks unanswered.
  const std::vector<int>& raw() const { return values_; }

  bool operator==(const AnswerSet&) const = default;

 private:
  std::vector<int> values_;
  std::size_t count_ = 0;
};

// Answers every dimension from a full 0/1 vector.
AnswerSet answers_from(const Eigen::Ref<const Vector>& x_human, const QueryMask& mask);

}  // namespace hfq
