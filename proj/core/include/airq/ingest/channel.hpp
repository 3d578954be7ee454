#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "airq/salubrity.hpp"
#include "airq/time.hpp"

namespace airq::ingest {

inline constexpr std::size_t kMaxFields = 8;

struct FieldDef {
  std::string name;
  std::string unit;
};

struct Retention {
  std::optional<std::size_t> max_entries;
  std::optional<std::chrono::seconds> max_age;  // relative to the newest ts
};

// Named time-series container with up to eight scalar fields per entry.
struct Channel {
  std::string channel_id;
  std::string name;
  std::vector<FieldDef> fields;
  Retention retention;

  // Throws Error{kInvalidParameter}.
  void validate() const;
  std::optional<std::size_t> field_index(const std::string& name) const;
};

// Channel for one simulated device: temperature_c, humidity_pct, mq135_adc.
Channel device_channel(const std::string& device_id);

struct FeedEntry {
  std::uint64_t entry_id = 0;
  Timestamp ts;
  std::string device_id;
  std::vector<std::optional<double>> values;  // aligned with Channel::fields
  std::optional<salubrity::SalubrityScore> derived_salubrity;
  std::optional<double> derived_ppm;
  std::vector<std::string> flags;

  friend bool operator==(const FeedEntry&, const FeedEntry&) = default;
};

nlohmann::json to_json(const Channel& c);
Channel channel_from_json(const nlohmann::json& j);

// One JSON line of the persistence log; values keyed by field name.
nlohmann::json to_json(const FeedEntry& e, const Channel& c);
FeedEntry feed_entry_from_json(const nlohmann::json& j, const Channel& c);

}  // namespace airq::ingest
