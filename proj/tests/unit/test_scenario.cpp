#include <doctest.h>

#include <nlohmann/json.hpp>

#include "airq/error.hpp"
#include "airq/sim/payload.hpp"
#include "airq/sim/scenario.hpp"
#include "airq/time.hpp"

using namespace airq;
using namespace airq::sim;
using nlohmann::json;

namespace {

Scenario quiet(double duration, double period) {
  Scenario s;
  s.duration_s = duration;
  s.sample_period_s = period;
  return s;
}

Dht11Spec noiseless() {
  Dht11Spec d;
  d.t_noise_sd = 0;
  d.h_noise_sd = 0;
  return d;
}

}  // namespace

TEST_CASE("payload count is the ceiling of duration over period") {
  CHECK(quiet(60, 10).sample_count() == 6);
  CHECK(quiet(65, 10).sample_count() == 7);
  CHECK(quiet(600, 10).sample_count() == 60);
  CHECK(quiet(1, 10).sample_count() == 1);

  std::size_t calls = 0;
  const auto n = run_scenario(quiet(60, 10), {}, {}, [&](const std::string&, const std::string&) { ++calls; });
  CHECK(n == 6);
  CHECK(calls == 6);
}

TEST_CASE("timestamps are start plus k periods on the device topic") {
  auto s = quiet(30, 10);
  s.device_id = "dev-7";
  std::vector<std::string> topics;
  std::vector<json> payloads;
  run_scenario(s, {}, {}, [&](const std::string& t, const std::string& p) {
    topics.push_back(t);
    payloads.push_back(json::parse(p));
  });
  REQUIRE(payloads.size() == 3);
  CHECK(topics[0] == "workshop/dev-7/reading");
  CHECK(payloads[0]["ts"] == "2024-01-01T00:00:00Z");
  CHECK(payloads[1]["ts"] == "2024-01-01T00:00:10Z");
  CHECK(payloads[2]["ts"] == "2024-01-01T00:00:20Z");
  CHECK(payloads[0]["device_id"] == "dev-7");
}

TEST_CASE("wire payload field order") {
  WirePayload p{parse_iso8601("2024-01-01T00:00:00Z"), "sim-01", 22, 41, 512, {}};
  CHECK(serialize(p) ==
        R"({"ts":"2024-01-01T00:00:00Z","device_id":"sim-01","temperature_c":22,"humidity_pct":41,"mq135_adc":512,"flags":[]})");
}

TEST_CASE("gas spike with zero ramp is a step inside the window") {
  auto s = quiet(100, 10);
  s.events.push_back({30, 60, EventKind::kGasSpike, 400, 0});
  CHECK(conditions_at(s, 29.9).gas_ppm == 100);
  CHECK(conditions_at(s, 30).gas_ppm == 500);
  CHECK(conditions_at(s, 59.9).gas_ppm == 500);
  CHECK(conditions_at(s, 60).gas_ppm == 100);

  const Mq135Spec mq;
  const auto payloads = generate_payloads(s, noiseless(), mq);
  for (std::size_t k = 0; k < payloads.size(); ++k) {
    const double t = 10.0 * k;
    const int expected = mq135_adc_from_ppm(t >= 30 && t < 60 ? 500 : 100, mq);
    CHECK(payloads[k].mq135_adc == expected);
  }
}

TEST_CASE("ramps are linear at both edges") {
  auto s = quiet(100, 10);
  s.events.push_back({20, 80, EventKind::kTempDrift, 4, 20});
  CHECK(conditions_at(s, 20).temp_c == doctest::Approx(21));
  CHECK(conditions_at(s, 30).temp_c == doctest::Approx(23));
  CHECK(conditions_at(s, 40).temp_c == doctest::Approx(25));
  CHECK(conditions_at(s, 60).temp_c == doctest::Approx(25));
  CHECK(conditions_at(s, 70).temp_c == doctest::Approx(23));
  CHECK(conditions_at(s, 80).temp_c == doctest::Approx(21));
  s.events = {{0, 100, EventKind::kHumDrift, -10, 0}};
  CHECK(conditions_at(s, 50).hum_pct == doctest::Approx(30));
}

TEST_CASE("same seed gives byte-identical streams, another seed differs") {
  auto s = quiet(600, 10);
  s.events.push_back({200, 320, EventKind::kGasSpike, 400, 20});
  std::vector<std::string> a, b, c;
  run_scenario(s, {}, {}, [&](const std::string&, const std::string& p) { a.push_back(p); });
  run_scenario(s, {}, {}, [&](const std::string&, const std::string& p) { b.push_back(p); });
  s.seed = 2;
  run_scenario(s, {}, {}, [&](const std::string&, const std::string& p) { c.push_back(p); });
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("quantized outputs stay in range") {
  auto s = quiet(3600, 10);
  s.baseline = {48, 88, 2000};
  s.events.push_back({0, 3600, EventKind::kTempDrift, 10, 600});
  s.events.push_back({0, 3600, EventKind::kHumDrift, 10, 600});
  const Dht11Spec dht;
  const Mq135Spec mq;
  for (const auto& p : generate_payloads(s, dht, mq)) {
    CHECK(p.temperature_c >= dht.t_min);
    CHECK(p.temperature_c <= dht.t_max);
    CHECK(p.humidity_pct >= dht.h_min);
    CHECK(p.humidity_pct <= dht.h_max);
    CHECK(p.mq135_adc >= 0);
    CHECK(p.mq135_adc <= mq.adc_max());
  }
}

TEST_CASE("publish failures retry and then abort with the published count") {
  auto s = quiet(60, 10);
  RunOptions ro;
  ro.retry = {3, std::chrono::milliseconds(1), 2.0, std::chrono::milliseconds(4)};

  int calls = 0;
  const auto flaky = [&](const std::string&, const std::string&) {
    if (++calls % 2 == 1) throw Error(ErrorCode::kNetwork, "transient");
  };
  CHECK(run_scenario(s, {}, {}, flaky, ro) == 6);
  CHECK(calls == 12);

  int sent = 0;
  const auto dies = [&](const std::string&, const std::string&) {
    if (sent == 4) throw Error(ErrorCode::kNetwork, "gone");
    ++sent;
  };
  try {
    run_scenario(s, {}, {}, dies, ro);
    FAIL("expected abort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kScenarioAbort);
    CHECK(std::string(e.what()).find("published 4 of 6") != std::string::npos);
  }
}

TEST_CASE("scenario validation and json") {
  auto s = quiet(60, 0);
  CHECK_THROWS_AS(s.validate(), Error);
  s = quiet(60, 10);
  s.events.push_back({50, 70, EventKind::kGasSpike, 1, 0});
  CHECK_THROWS_AS(s.validate(), Error);
  s.events = {{10, 20, EventKind::kGasSpike, 1, -1}};
  CHECK_THROWS_AS(s.validate(), Error);

  s = quiet(120, 5);
  s.device_id = "x1";
  s.seed = 9;
  s.events = {{10, 20, EventKind::kHumDrift, 3, 2}};
  const auto back = scenario_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));

  CHECK_THROWS_AS(scenario_from_json(json{{"device_id", 5}}), Error);
  CHECK_THROWS_AS(scenario_from_json(json{{"events", json::array({{{"kind", "FIRE"}}})}}), Error);
}
