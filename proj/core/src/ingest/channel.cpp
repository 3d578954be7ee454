#include "airq/ingest/channel.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "airq/error.hpp"

namespace airq::ingest {

using nlohmann::json;

void Channel::validate() const {
  if (channel_id.empty() || channel_id.size() > 64 ||
      !std::all_of(channel_id.begin(), channel_id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
      }) ||
      channel_id.front() == '.')
    fail(ErrorCode::kInvalidParameter,
         "channel_id '" + channel_id + "' must be 1-64 characters of [A-Za-z0-9._-]",
         {"channel_id"});
  if (fields.empty() || fields.size() > kMaxFields)
    fail(ErrorCode::kInvalidParameter, "a channel needs between 1 and 8 fields", {"fields"});
  std::set<std::string> names;
  for (const auto& f : fields) {
    if (f.name.empty()) fail(ErrorCode::kInvalidParameter, "field names must not be empty", {"fields"});
    if (!names.insert(f.name).second)
      fail(ErrorCode::kInvalidParameter, "duplicate field name '" + f.name + "'", {"fields"});
  }
  if (retention.max_entries && *retention.max_entries == 0)
    fail(ErrorCode::kInvalidParameter, "retention.max_entries must be >= 1", {"retention"});
  if (retention.max_age && retention.max_age->count() <= 0)
    fail(ErrorCode::kInvalidParameter, "retention.max_age_s must be > 0", {"retention"});
}

std::optional<std::size_t> Channel::field_index(const std::string& field) const {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == field) return i;
  return std::nullopt;
}

Channel device_channel(const std::string& device_id) {
  Channel c;
  c.channel_id = device_id;
  c.name = "Workshop sensor " + device_id;
  c.fields = {{"temperature_c", "degC"}, {"humidity_pct", "%RH"}, {"mq135_adc", "adc"}};
  return c;
}

json to_json(const Channel& c) {
  json fields = json::array();
  for (const auto& f : c.fields) fields.push_back({{"name", f.name}, {"unit", f.unit}});
  json retention = json::object();
  if (c.retention.max_entries) retention["max_entries"] = *c.retention.max_entries;
  if (c.retention.max_age) retention["max_age_s"] = c.retention.max_age->count();
  return {{"channel_id", c.channel_id}, {"name", c.name}, {"fields", fields}, {"retention", retention}};
}

Channel channel_from_json(const json& j) {
  Channel c;
  try {
    c.channel_id = j.at("channel_id").get<std::string>();
    c.name = j.value("name", c.channel_id);
    for (const auto& f : j.at("fields")) {
      if (f.is_string())
        c.fields.push_back({f.get<std::string>(), ""});
      else
        c.fields.push_back({f.at("name").get<std::string>(), f.value("unit", "")});
    }
    if (j.contains("retention")) {
      const auto& r = j["retention"];
      if (r.contains("max_entries")) c.retention.max_entries = r["max_entries"].get<std::size_t>();
      if (r.contains("max_age_s")) c.retention.max_age = std::chrono::seconds(r["max_age_s"].get<long long>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("invalid channel definition: ") + e.what(), {"channels"});
  }
  c.validate();
  return c;
}

json to_json(const FeedEntry& e, const Channel& c) {
  json j;
  j["entry_id"] = e.entry_id;
  j["ts"] = format_iso8601(e.ts);
  j["device_id"] = e.device_id;
  json values = json::object();
  for (std::size_t i = 0; i < c.fields.size() && i < e.values.size(); ++i)
    if (e.values[i]) values[c.fields[i].name] = *e.values[i];
  j["values"] = values;
  j["ppm"] = e.derived_ppm ? json(*e.derived_ppm) : json(nullptr);
  j["salubrity"] = e.derived_salubrity ? salubrity::to_json(*e.derived_salubrity) : json(nullptr);
  j["flags"] = e.flags;
  return j;
}

FeedEntry feed_entry_from_json(const json& j, const Channel& c) {
  FeedEntry e;
  e.entry_id = j.at("entry_id").get<std::uint64_t>();
  e.ts = parse_iso8601(j.at("ts").get<std::string>());
  e.device_id = j.value("device_id", "");
  e.values.resize(c.fields.size());
  if (j.contains("values"))
    for (std::size_t i = 0; i < c.fields.size(); ++i)
      if (j["values"].contains(c.fields[i].name)) e.values[i] = j["values"][c.fields[i].name].get<double>();
  if (j.contains("ppm") && !j["ppm"].is_null()) e.derived_ppm = j["ppm"].get<double>();
  if (j.contains("salubrity") && !j["salubrity"].is_null()) {
    const auto& s = j["salubrity"];
    e.derived_salubrity = salubrity::SalubrityScore{s.at("value").get<double>(), s.at("temp_factor").get<double>(),
                                                    s.at("hum_factor").get<double>()};
  }
  if (j.contains("flags")) e.flags = j["flags"].get<std::vector<std::string>>();
  return e;
}

}  // namespace airq::ingest
