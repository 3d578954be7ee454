#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace airq {

// Error classes surfaced by the library. The CLI maps each class to a
// distinct exit code and the HTTP layer maps them to status codes.
enum class ErrorCode {
  kInvalidParameter,
  kInsufficientData,
  kDegenerateData,
  kSaturatedReading,
  kParse,
  kSchema,
  kRange,
  kNotFound,
  kRouting,
  kConfig,
  kIo,
  kNetwork,
  kProtocol,
  kScenarioAbort,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::vector<std::string> fields = {})
      : std::runtime_error(std::move(message)), code_(code), fields_(std::move(fields)) {}

  ErrorCode code() const noexcept { return code_; }

  // Offending field names, when the error is attributable to input fields.
  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  ErrorCode code_;
  std::vector<std::string> fields_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message,
                              std::vector<std::string> fields = {}) {
  throw Error(code, std::move(message), std::move(fields));
}

}  // namespace airq
