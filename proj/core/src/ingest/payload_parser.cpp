#include "airq/ingest/payload_parser.hpp"

#include <nlohmann/json.hpp>

#include "airq/error.hpp"

namespace airq::ingest {
namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
  return out;
}

}  // namespace

sim::WirePayload parse_payload(std::string_view bytes, const PayloadLimits& limits) {
  const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kParse, "payload is not valid JSON");
  if (!j.is_object()) fail(ErrorCode::kSchema, "payload must be a JSON object");

  std::vector<std::string> missing;
  std::vector<std::string> mistyped;
  sim::WirePayload p;

  if (!j.contains("ts")) {
    missing.emplace_back("ts");
  } else if (!j["ts"].is_string()) {
    mistyped.emplace_back("ts");
  } else {
    try {
      p.ts = parse_iso8601(j["ts"].get<std::string>());
    } catch (const Error&) {
      mistyped.emplace_back("ts");
    }
  }

  if (!j.contains("device_id"))
    missing.emplace_back("device_id");
  else if (!j["device_id"].is_string() || j["device_id"].get<std::string>().empty())
    mistyped.emplace_back("device_id");
  else
    p.device_id = j["device_id"].get<std::string>();

  auto integer = [&](const char* key, int& dst) {
    if (!j.contains(key)) {
      missing.emplace_back(key);
      return;
    }
    const auto& v = j[key];
    if (!v.is_number_integer()) {
      mistyped.emplace_back(key);
      return;
    }
    const auto wide = v.get<long long>();
    // Out-of-int values are reported as range errors below.
    dst = wide > 1'000'000'000 ? 1'000'000'000 : wide < -1'000'000'000 ? -1'000'000'000 : static_cast<int>(wide);
  };
  integer("temperature_c", p.temperature_c);
  integer("humidity_pct", p.humidity_pct);
  integer("mq135_adc", p.mq135_adc);

  if (j.contains("flags")) {
    const auto& f = j["flags"];
    bool ok = f.is_array();
    if (ok)
      for (const auto& item : f) ok = ok && item.is_string();
    if (ok)
      p.flags = f.get<std::vector<std::string>>();
    else
      mistyped.emplace_back("flags");
  }

  if (!missing.empty() || !mistyped.empty()) {
    std::string msg;
    if (!missing.empty()) msg = "missing field(s): " + join(missing);
    if (!mistyped.empty()) msg += (msg.empty() ? "" : "; ") + std::string("invalid type/format: ") + join(mistyped);
    auto fields = missing;
    fields.insert(fields.end(), mistyped.begin(), mistyped.end());
    fail(ErrorCode::kSchema, msg, std::move(fields));
  }

  std::vector<std::string> out_of_range;
  std::string detail;
  auto check = [&](const char* key, int v, int lo, int hi) {
    if (v >= lo && v <= hi) return;
    out_of_range.emplace_back(key);
    detail += (detail.empty() ? "" : "; ") + std::string(key) + "=" + std::to_string(v) +
              " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  };
  check("temperature_c", p.temperature_c, limits.t_min, limits.t_max);
  check("humidity_pct", p.humidity_pct, limits.h_min, limits.h_max);
  check("mq135_adc", p.mq135_adc, 0, limits.adc_max);
  if (!out_of_range.empty()) fail(ErrorCode::kRange, detail, std::move(out_of_range));
  return p;
}

}  // namespace airq::ingest
