#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heavytail {

enum class ErrorCode {
  Domain,
  InsufficientData,
  DegenerateData,
  Validation,
  Precondition,
  Structure,
  EmptyIndex,
  NoTable,
  Format,
  EmptyTable,
  Transport,
  Timeout,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::Domain: return "domain error";
  case ErrorCode::InsufficientData: return "insufficient data";
  case ErrorCode::DegenerateData: return "degenerate data";
  case ErrorCode::Validation: return "validation error";
  case ErrorCode::Precondition: return "precondition violated";
  case ErrorCode::Structure: return "structure error";
  case ErrorCode::EmptyIndex: return "empty index";
  case ErrorCode::NoTable: return "no ranking table";
  case ErrorCode::Format: return "format error";
  case ErrorCode::EmptyTable: return "empty table";
  case ErrorCode::Transport: return "transport error";
  case ErrorCode::Timeout: return "timeout";
  }
  return "error";
}

/// Every failure raised by the library carries one of the codes above, so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message, int status = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code), status_(status) {}

  ErrorCode code() const noexcept { return code_; }

  /// HTTP status for transport errors, 0 otherwise.
  int status() const noexcept { return status_; }

private:
  ErrorCode code_;
  int status_;
};

} // namespace heavytail
