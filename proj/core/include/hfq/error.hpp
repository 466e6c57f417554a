#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hfq {

// Stable machine-readable error categories. The string form is part of the
// CLI and HTTP contracts and must not change.
enum class ErrorCode {
  invalid_input,
  degenerate_labels,
  capacity,
  invalid_answer,
  parse,
  record,
  stratification,
  empty_dataset,
  configuration,
  not_found,
  budget_exhausted,
  conflict,
  validation,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace hfq
