#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "airq/sim/dht11.hpp"
#include "airq/sim/mq135.hpp"
#include "airq/sim/payload.hpp"

namespace airq::sim {

enum class EventKind { kGasSpike, kTempDrift, kHumDrift };

const char* to_string(EventKind kind);

// Additive disturbance over [start_s, end_s) with linear ramps of ramp_s
// seconds at both edges (ramp_s = 0 is a step).
struct ScenarioEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  EventKind kind = EventKind::kGasSpike;
  double magnitude = 0.0;
  double ramp_s = 0.0;
};

struct Baseline {
  double temp_c = 21.0;
  double hum_pct = 40.0;
  double gas_ppm = 100.0;
};

struct Scenario {
  std::string device_id = "sim-01";
  Timestamp start = Timestamp{std::chrono::seconds{1704067200}};  // 2024-01-01T00:00:00Z
  double duration_s = 60.0;
  double sample_period_s = 10.0;
  Baseline baseline;
  std::vector<ScenarioEvent> events;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t sample_count() const;  // ceil(duration / period)
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

// Ground-truth conditions at t seconds into the scenario.
Baseline conditions_at(const Scenario& s, double t_s);

using Publisher = std::function<void(const std::string& topic, const std::string& payload)>;

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{100};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{2000};
};

struct RunOptions {
  RetryPolicy retry;
  // Pace publishes at the sample period and stamp them with the wall clock.
  bool realtime = false;
};

// Generates the scenario's payload sequence without publishing.
std::vector<WirePayload> generate_payloads(const Scenario& scn, const Dht11Spec& dht,
                                           const Mq135Spec& mq);

// Publishes every payload to reading_topic(device_id). A publish that still
// fails after the retry policy throws Error{kScenarioAbort} with the count sent.
std::size_t run_scenario(const Scenario& scn, const Dht11Spec& dht, const Mq135Spec& mq,
                         const Publisher& publish, const RunOptions& opts = {});

}  // namespace airq::sim
