#include <doctest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "airq/error.hpp"
#include "airq/ingest/ingestor.hpp"
#include "airq/ingest/subscriber.hpp"
#include "airq/mqtt/broker.hpp"
#include "airq/mqtt/client.hpp"
#include "airq/sim/scenario.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using airq::Error;
using airq::ErrorCode;
using airq::Timestamp;
using airq::from_epoch_ms;
using airq::testing::TempDir;
using namespace airq::ingest;
namespace sim = airq::sim;
namespace oracle = airq::oracle;

namespace {

sim::WirePayload reading(std::int64_t ms, int t, int h, int adc, const std::string& dev = "bench-01") {
  sim::WirePayload p;
  p.ts = from_epoch_ms(ms);
  p.device_id = dev;
  p.temperature_c = t;
  p.humidity_pct = h;
  p.mq135_adc = adc;
  return p;
}

struct Fixture {
  FeedStore store;
  Ingestor ingestor;
  explicit Fixture(IngestorOptions opts = {}) : ingestor(store, std::move(opts)) {
    store.add_channel(device_channel("bench-01"));
  }
};

}  // namespace

TEST_CASE("derived values for a nominal reading") {
  Fixture f;
  const auto r = f.ingestor.ingest(reading(0, 22, 41, 512));
  REQUIRE(r.entry);
  const auto& e = *r.entry;
  const double expected =
      100.0 * static_cast<double>(oracle::gaussian(22, 21, 4) * oracle::gaussian(41, 40, 12));
  CHECK(e.derived_salubrity->value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(e.derived_salubrity->value == doctest::Approx(96.587).epsilon(1e-4));
  REQUIRE(e.derived_ppm);
  CHECK(*e.derived_ppm == doctest::Approx(static_cast<double>(oracle::mq135_ppm_for_code(512, 10, 10000, 10000, 110, -2.7))).epsilon(1e-12));
  CHECK(*e.values[0] == 22);
  CHECK(*e.values[1] == 41);
  CHECK(*e.values[2] == 512);
  CHECK(e.flags.empty());
  CHECK(r.events.empty());
}

TEST_CASE("saturated gas code is stored without ppm") {
  Fixture f;
  for (int adc : {0, 1023}) {
    const auto r = f.ingestor.ingest(reading(adc, 21, 40, adc));
    REQUIRE(r.entry);
    CHECK_FALSE(r.entry->derived_ppm.has_value());
    CHECK(r.entry->flags == std::vector<std::string>{"GAS_SATURATED"});
    CHECK(r.entry->derived_salubrity->value == 100.0);
  }
  CHECK(f.store.size("bench-01") == 2);
  CHECK(f.ingestor.events("bench-01").empty());
}

TEST_CASE("unknown device is a routing error and is dead-lettered") {
  Fixture f;
  try {
    f.ingestor.ingest(reading(0, 21, 40, 500, "ghost"));
    FAIL("expected routing error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRouting);
  }
  CHECK(f.ingestor.dead_letters().size() == 1);
  CHECK(f.ingestor.metrics().routing_errors == 1);
  CHECK_FALSE(f.store.has_channel("ghost"));
}

TEST_CASE("auto-created device channels") {
  IngestorOptions o;
  o.auto_create_channels = true;
  Fixture f(o);
  CHECK(f.ingestor.ingest(reading(0, 21, 40, 500, "new-dev")).entry);
  CHECK(f.store.has_channel("new-dev"));
  CHECK(f.store.channel("new-dev").fields.size() == 3);
}

TEST_CASE("handle_message never throws and classifies outcomes") {
  Fixture f;
  const auto ok = sim::serialize(reading(0, 21, 40, 500));
  CHECK(f.ingestor.handle_message("workshop/bench-01/reading", ok) == IngestOutcome::kIngested);
  CHECK(f.ingestor.handle_message("workshop/bench-01/reading", ok) == IngestOutcome::kDuplicate);
  CHECK(f.ingestor.handle_message("workshop/bench-01/reading", "{oops") == IngestOutcome::kRejected);
  CHECK(f.ingestor.handle_message("workshop/bench-01/reading", "{}") == IngestOutcome::kRejected);
  CHECK(f.ingestor.handle_message("workshop/other/reading", sim::serialize(reading(1, 21, 40, 500))) ==
        IngestOutcome::kDeadLettered);
  CHECK(f.ingestor.handle_message("workshop/ghost/reading", sim::serialize(reading(1, 21, 40, 500, "ghost"))) ==
        IngestOutcome::kDeadLettered);
  std::string junk(300, '\0');
  for (std::size_t i = 0; i < junk.size(); ++i) junk[i] = static_cast<char>(i * 37);
  CHECK_NOTHROW(f.ingestor.handle_message("x", junk));

  const auto m = f.ingestor.metrics();
  CHECK(m.received == 7);
  CHECK(m.ingested == 1);
  CHECK(m.duplicates == 1);
  CHECK(m.rejected == 3);
  CHECK(m.routing_errors == 2);
  CHECK(m.dead_lettered == 5);
  CHECK(f.store.size("bench-01") == 1);
}

TEST_CASE("alerts run inside ingest") {
  Fixture f;
  f.ingestor.set_rules("bench-01", {{"s", AlertKind::kSalubrityBelow, 50, 5, 1}});
  const auto s_at = [](int t, int h) { return airq::salubrity::salubrity(t, h, {}).value; };
  REQUIRE(s_at(26, 40) < 50);
  REQUIRE(s_at(25, 47) > 50);
  REQUIRE(s_at(25, 47) < 55);
  REQUIRE(s_at(25, 40) >= 55);
  auto r = f.ingestor.ingest(reading(1000, 26, 40, 500));
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == AlertEventKind::kRaise);
  CHECK(r.events[0].channel_id == "bench-01");
  CHECK(f.ingestor.ingest(reading(2000, 25, 47, 500)).events.empty());
  r = f.ingestor.ingest(reading(3000, 25, 40, 500));
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == AlertEventKind::kClear);
  CHECK(f.ingestor.events("bench-01").size() == 2);
  CHECK(f.ingestor.events("bench-01", from_epoch_ms(2000), from_epoch_ms(4000)).size() == 1);
  CHECK_THROWS_AS(f.ingestor.events("bench-01", from_epoch_ms(5), from_epoch_ms(1)), Error);
  // duplicates do not feed the rule
  CHECK(f.ingestor.ingest(reading(1000, 26, 40, 500)).events.empty());
}

TEST_CASE("changing rules resets in-flight state") {
  Fixture f;
  f.ingestor.set_rules("bench-01", {{"s", AlertKind::kSalubrityBelow, 50, 5, 1}});
  f.ingestor.ingest(reading(1000, 30, 40, 500));
  CHECK(f.ingestor.states("bench-01").at("s").status == AlertStatus::kRaised);

  // same rules: nothing happens
  f.ingestor.set_rules("bench-01", f.ingestor.rules("bench-01"));
  CHECK(f.ingestor.states("bench-01").at("s").status == AlertStatus::kRaised);
  CHECK(f.ingestor.events("bench-01").size() == 1);

  f.ingestor.set_rules("bench-01", {{"s", AlertKind::kSalubrityBelow, 40, 5, 1}});
  const auto ev = f.ingestor.events("bench-01");
  REQUIRE(ev.size() == 2);
  CHECK(ev[1].kind == AlertEventKind::kConfigReset);
  CHECK(f.ingestor.states("bench-01").at("s").status == AlertStatus::kIdle);

  CHECK_THROWS_AS(f.ingestor.set_rules("bench-01", {{"s", AlertKind::kSalubrityBelow, 50, -1, 1}}), Error);
  CHECK(f.ingestor.rules("bench-01")[0].threshold == 40);
  try {
    f.ingestor.set_rules("nope", {});
    FAIL("expected not found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("rules, events and raised state survive a restart") {
  TempDir dir;
  {
    FeedStore store(dir.path());
    store.add_channel(device_channel("bench-01"));
    Ingestor ing(store, {}, dir.path());
    ing.set_rules("bench-01", {{"s", AlertKind::kSalubrityBelow, 60, 5, 2}});
    ing.ingest(reading(1000, 30, 40, 500));
    ing.ingest(reading(2000, 30, 40, 500));
    CHECK(ing.events("bench-01").size() == 1);
  }
  FeedStore store(dir.path());
  for (const auto& c : load_channel_registry(dir.path())) store.add_channel(c);
  Ingestor ing(store, {}, dir.path());
  CHECK(ing.rules("bench-01")[0].threshold == 60);
  CHECK(ing.events("bench-01").size() == 1);
  CHECK(ing.states("bench-01").at("s").status == AlertStatus::kRaised);
  const auto r = ing.ingest(reading(3000, 21, 40, 500));
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == AlertEventKind::kClear);
  CHECK(std::filesystem::exists(dir / "dead_letter.jsonl"));
}

TEST_CASE("stored salubrity matches a fresh computation for every entry") {
  Fixture f;
  sim::Scenario scn;
  scn.device_id = "bench-01";
  scn.duration_s = 3600;
  scn.seed = 7;
  scn.events.push_back({600, 1800, sim::EventKind::kTempDrift, 8, 60});
  scn.events.push_back({2000, 2600, sim::EventKind::kHumDrift, 30, 60});
  const auto payloads = sim::generate_payloads(scn, {}, {});
  for (const auto& p : payloads) f.ingestor.ingest(p);
  FeedQuery all;
  all.channel_id = "bench-01";
  const auto q = f.store.query(all);
  REQUIRE(q.entries.size() == payloads.size());
  for (const auto& e : q.entries) {
    const auto fresh = airq::salubrity::salubrity(*e.values[0], *e.values[1], {});
    CHECK(*e.derived_salubrity == fresh);
  }
}

TEST_CASE("subscriber feeds broker traffic into the store") {
  airq::mqtt::Broker broker;
  FeedStore store;
  store.add_channel(device_channel("bench-01"));
  Ingestor ing(store, {});
  SubscriberOptions so;
  so.broker = airq::mqtt::BrokerUri::parse(broker.uri());
  so.client.client_id = "sub";
  MqttSubscriber sub(ing, so);
  sub.start();
  REQUIRE(sub.wait_connected(std::chrono::seconds(5)));

  airq::mqtt::ClientOptions co;
  co.client_id = "pub";
  airq::mqtt::Client pub(so.broker, co);
  sim::Scenario scn;
  scn.device_id = "bench-01";
  const auto n = sim::run_scenario(scn, {}, {}, [&](const std::string& t, const std::string& p) {
    pub.publish(t, p, 1);
  });
  CHECK(n == 6);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  while (store.size("bench-01") < 6 && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  CHECK(store.size("bench-01") == 6);
  CHECK(ing.metrics().dead_lettered == 0);
  sub.stop();
}
