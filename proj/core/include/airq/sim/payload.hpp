#pragma once

#include <string>
#include <vector>

#include "airq/time.hpp"

namespace airq::sim {

// One reading as published on workshop/{device_id}/reading.
struct WirePayload {
  Timestamp ts;
  std::string device_id;
  int temperature_c = 0;
  int humidity_pct = 0;
  int mq135_adc = 0;
  std::vector<std::string> flags;

  friend bool operator==(const WirePayload&, const WirePayload&) = default;
};

// JSON with fields in wire order: ts, device_id, temperature_c, humidity_pct,
// mq135_adc, flags.
std::string serialize(const WirePayload& p);

std::string reading_topic(const std::string& device_id);

inline constexpr const char* kReadingTopicFilter = "workshop/+/reading";

}  // namespace airq::sim
