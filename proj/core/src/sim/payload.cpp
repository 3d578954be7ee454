#include "airq/sim/payload.hpp"

#include <nlohmann/json.hpp>

namespace airq::sim {

std::string serialize(const WirePayload& p) {
  nlohmann::ordered_json j;
  j["ts"] = format_iso8601(p.ts);
  j["device_id"] = p.device_id;
  j["temperature_c"] = p.temperature_c;
  j["humidity_pct"] = p.humidity_pct;
  j["mq135_adc"] = p.mq135_adc;
  j["flags"] = p.flags;
  return j.dump();
}

std::string reading_topic(const std::string& device_id) { return "workshop/" + device_id + "/reading"; }

}  // namespace airq::sim
