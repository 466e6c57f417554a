#include "hfq/error.hpp"

namespace hfq {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::degenerate_labels: return "degenerate_labels";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::invalid_answer: return "invalid_answer";
    case ErrorCode::parse: return "parse";
    case ErrorCode::record: return "record";
    case ErrorCode::stratification: return "stratification";
    case ErrorCode::empty_dataset: return "empty_dataset";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::budget_exhausted: return "budget_exhausted";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace hfq
