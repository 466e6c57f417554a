#include "hfq/acquisition/query.hpp"

#include "hfq/error.hpp"

#include <string>

namespace hfq {

std::size_t QueryMask::popcount() const {
  std::size_t c = 0;
  for (auto b : bits) c += b != 0;
  return c;
}

std::vector<std::size_t> QueryMask::dims() const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < bits.size(); ++d) {
    if (bits[d]) out.push_back(d);
  }
  return out;
}

void QueryMask::validate() const {
  for (auto b : bits) require(b == 0 || b == 1, ErrorCode::invalid_input, "query mask entry is not 0 or 1");
  require(popcount() <= budget, ErrorCode::invalid_input,
          "query mask has " + std::to_string(popcount()) + " queries but budget " +
              std::to_string(budget));
}

bool AnswerSet::contains(std::size_t d) const { return d < values_.size() && values_[d] >= 0; }

int AnswerSet::value(std::size_t d) const {
  require(contains(d), ErrorCode::invalid_input, "dimension " + std::to_string(d) + " is not answered");
  return values_[d];
}

void AnswerSet::set(std::size_t d, int value) {
  require(d < values_.size(), ErrorCode::invalid_input,
          "answer for dimension " + std::to_string(d) + " outside [0, " +
              std::to_string(values_.size()) + ")");
  require(value == 0 || value == 1, ErrorCode::invalid_answer,
          "answer for dimension " + std::to_string(d) + " is not 0 or 1");
  require(values_[d] < 0, ErrorCode::conflict, "dimension " + std::to_string(d) + " already answered");
  values_[d] = value;
  ++count_;
}

std::vector<std::size_t> AnswerSet::dims() const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < values_.size(); ++d) {
    if (values_[d] >= 0) out.push_back(d);
  }
  return out;
}

QueryMask AnswerSet::mask(std::size_t budget) const {
  QueryMask m(values_.size(), budget);
  for (std::size_t d = 0; d < values_.size(); ++d) m.bits[d] = values_[d] >= 0;
  return m;
}

AnswerSet answers_from(const Eigen::Ref<const Vector>& x_human, const QueryMask& mask) {
  require(static_cast<std::size_t>(x_human.size()) == mask.bits.size(), ErrorCode::invalid_input,
          "mask and human vector lengths differ");
  AnswerSet a(mask.bits.size());
  for (std::size_t d = 0; d < mask.bits.size(); ++d) {
    if (mask.bits[d]) a.set(d, static_cast<int>(x_human(static_cast<Eigen::Index>(d))));
  }
  return a;
}

}  // namespace hfq
