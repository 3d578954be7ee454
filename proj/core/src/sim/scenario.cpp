#include "airq/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "airq/error.hpp"

namespace airq::sim {
namespace {

using nlohmann::json;

EventKind kind_from_string(const std::string& s) {
  if (s == "GAS_SPIKE") return EventKind::kGasSpike;
  if (s == "TEMP_DRIFT") return EventKind::kTempDrift;
  if (s == "HUM_DRIFT") return EventKind::kHumDrift;
  fail(ErrorCode::kConfig, "unknown scenario event kind '" + s + "'", {"events[].kind"});
}

double number(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    fail(ErrorCode::kConfig, "scenario field '" + path + key + "' must be a number", {path + key});
  return j[key].get<double>();
}

// Trapezoid envelope in [0, 1].
double envelope(const ScenarioEvent& e, double t) {
  if (t < e.start_s || t >= e.end_s) return 0.0;
  if (e.ramp_s <= 0.0) return 1.0;
  return std::min({1.0, (t - e.start_s) / e.ramp_s, (e.end_s - t) / e.ramp_s});
}

}  // namespace

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kGasSpike: return "GAS_SPIKE";
    case EventKind::kTempDrift: return "TEMP_DRIFT";
    case EventKind::kHumDrift: return "HUM_DRIFT";
  }
  return "?";
}

void Scenario::validate() const {
  if (device_id.empty()) fail(ErrorCode::kInvalidParameter, "device_id must not be empty", {"device_id"});
  if (device_id.find_first_of("/+#") != std::string::npos)
    fail(ErrorCode::kInvalidParameter, "device_id must not contain MQTT topic characters", {"device_id"});
  if (!(sample_period_s > 0))
    fail(ErrorCode::kInvalidParameter, "sample_period_s must be > 0", {"sample_period_s"});
  if (!(duration_s >= 0)) fail(ErrorCode::kInvalidParameter, "duration_s must be >= 0", {"duration_s"});
  for (const auto& e : events) {
    if (!(e.start_s >= 0) || !(e.end_s <= duration_s) || !(e.start_s <= e.end_s))
      fail(ErrorCode::kInvalidParameter, "scenario events must lie within [0, duration_s]", {"events"});
    if (!(e.ramp_s >= 0)) fail(ErrorCode::kInvalidParameter, "ramp_s must be >= 0", {"events[].ramp_s"});
  }
}

std::size_t Scenario::sample_count() const {
  return static_cast<std::size_t>(std::ceil(duration_s / sample_period_s - 1e-9));
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kConfig, "scenario must be a JSON object");
  Scenario s;
  try {
  if (j.contains("device_id")) s.device_id = j["device_id"].get<std::string>();
  if (j.contains("start")) s.start = parse_iso8601(j["start"].get<std::string>());
  s.duration_s = number(j, "duration_s", s.duration_s, "");
  s.sample_period_s = number(j, "sample_period_s", s.sample_period_s, "");
  if (j.contains("baseline")) {
    const auto& b = j["baseline"];
    s.baseline.temp_c = number(b, "temp_c", s.baseline.temp_c, "baseline.");
    s.baseline.hum_pct = number(b, "hum_pct", s.baseline.hum_pct, "baseline.");
    s.baseline.gas_ppm = number(b, "gas_ppm", s.baseline.gas_ppm, "baseline.");
  }
  if (j.contains("events")) {
    for (const auto& e : j["events"]) {
      ScenarioEvent ev;
      ev.start_s = number(e, "start_s", 0.0, "events[].");
      ev.end_s = number(e, "end_s", 0.0, "events[].");
      ev.kind = kind_from_string(e.at("kind").get<std::string>());
      ev.magnitude = number(e, "magnitude", 0.0, "events[].");
      ev.ramp_s = number(e, "ramp_s", 0.0, "events[].");
      s.events.push_back(ev);
    }
  }
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const Scenario& s) {
  json events = json::array();
  for (const auto& e : s.events)
    events.push_back({{"start_s", e.start_s}, {"end_s", e.end_s}, {"kind", to_string(e.kind)},
                      {"magnitude", e.magnitude}, {"ramp_s", e.ramp_s}});
  return {{"device_id", s.device_id},
          {"start", format_iso8601(s.start)},
          {"duration_s", s.duration_s},
          {"sample_period_s", s.sample_period_s},
          {"baseline",
           {{"temp_c", s.baseline.temp_c}, {"hum_pct", s.baseline.hum_pct}, {"gas_ppm", s.baseline.gas_ppm}}},
          {"events", events},
          {"seed", s.seed}};
}

Baseline conditions_at(const Scenario& s, double t_s) {
  Baseline c = s.baseline;
  for (const auto& e : s.events) {
    const double d = e.magnitude * envelope(e, t_s);
    switch (e.kind) {
      case EventKind::kGasSpike: c.gas_ppm += d; break;
      case EventKind::kTempDrift: c.temp_c += d; break;
      case EventKind::kHumDrift: c.hum_pct += d; break;
    }
  }
  return c;
}

std::vector<WirePayload> generate_payloads(const Scenario& scn, const Dht11Spec& dht,
                                           const Mq135Spec& mq) {
  scn.validate();
  dht.validate();
  mq.validate();
  std::mt19937_64 rng(scn.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t count = scn.sample_count();
  std::vector<WirePayload> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * scn.sample_period_s;
    const Baseline truth = conditions_at(scn, t);
    const NoiseDraw noise{normal(rng), normal(rng)};
    auto reading = dht11_quantize(truth.temp_c, truth.hum_pct, dht, noise);

    WirePayload p;
    p.ts = scn.start + std::chrono::milliseconds(std::llround(t * 1000.0));
    p.device_id = scn.device_id;
    p.temperature_c = reading.temperature_c;
    p.humidity_pct = reading.humidity_pct;
    p.mq135_adc = mq135_adc_from_ppm(std::max(truth.gas_ppm, 1e-6), mq);
    p.flags = std::move(reading.flags);
    out.push_back(std::move(p));
  }
  return out;
}

std::size_t run_scenario(const Scenario& scn, const Dht11Spec& dht, const Mq135Spec& mq,
                         const Publisher& publish, const RunOptions& opts) {
  auto payloads = generate_payloads(scn, dht, mq);
  const auto topic = reading_topic(scn.device_id);
  const auto period = std::chrono::milliseconds(std::llround(scn.sample_period_s * 1000.0));
  auto next_tick = std::chrono::steady_clock::now();

  std::size_t sent = 0;
  for (auto& p : payloads) {
    if (opts.realtime) {
      std::this_thread::sleep_until(next_tick);
      next_tick += period;
      p.ts = now_utc();
    }
    const auto body = serialize(p);
    auto backoff = opts.retry.initial_backoff;
    for (int attempt = 1;; ++attempt) {
      try {
        publish(topic, body);
        break;
      } catch (const std::exception& e) {
        if (attempt >= opts.retry.max_attempts)
          fail(ErrorCode::kScenarioAbort,
               "publish failed after " + std::to_string(attempt) + " attempts (" + e.what() +
                   "); published " + std::to_string(sent) + " of " +
                   std::to_string(payloads.size()));
        spdlog::warn("publish attempt {} failed: {}; retrying in {} ms", attempt, e.what(),
                     backoff.count());
        std::this_thread::sleep_for(backoff);
        backoff = std::min(opts.retry.max_backoff,
                           std::chrono::milliseconds(static_cast<long long>(
                               static_cast<double>(backoff.count()) * opts.retry.multiplier)));
      }
    }
    ++sent;
  }
  return sent;
}

}  // namespace airq::sim
