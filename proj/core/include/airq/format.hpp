#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace airq {

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

// RFC 4180 field quoting: quote when the field has a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

// Joins fields with commas and terminates the record with CRLF.
std::string csv_record(const std::vector<std::string>& fields);

// Splits RFC 4180 text into records. Accepts CRLF or LF line endings.
std::vector<std::vector<std::string>> csv_parse(std::string_view text);

}  // namespace airq
