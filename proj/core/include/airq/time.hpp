#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace airq {

// UTC instant with millisecond resolution. All wire formats use ISO-8601 UTC.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// "2024-01-01T00:00:00Z", or "2024-01-01T00:00:00.250Z" when sub-second.
std::string format_iso8601(Timestamp ts);

// Accepts YYYY-MM-DDTHH:MM:SS[.fff...](Z|+HH:MM|-HH:MM). Throws Error{kParse}.
Timestamp parse_iso8601(std::string_view text);

// Start of the UTC hour containing ts.
Timestamp floor_hour(Timestamp ts);

Timestamp now_utc();

inline Timestamp from_epoch_ms(long long ms) {
  return Timestamp{std::chrono::milliseconds{ms}};
}

inline long long epoch_ms(Timestamp ts) { return ts.time_since_epoch().count(); }

}  // namespace airq
