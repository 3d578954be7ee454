#include <doctest.h>

#include <cmath>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "airq/api/server.hpp"
#include "airq/error.hpp"
#include "airq/format.hpp"
#include "airq/ingest/ingestor.hpp"
#include "airq/sim/scenario.hpp"

using nlohmann::json;
using namespace airq::ingest;
namespace sim = airq::sim;

namespace {

sim::WirePayload reading(const char* iso, int t, int h, int adc = 500, const std::string& dev = "bench-01") {
  sim::WirePayload p;
  p.ts = airq::parse_iso8601(iso);
  p.device_id = dev;
  p.temperature_c = t;
  p.humidity_pct = h;
  p.mq135_adc = adc;
  return p;
}

struct Service {
  FeedStore store;
  Ingestor ingestor{store, {}};
  airq::api::ApiServer server{ingestor};
  std::unique_ptr<httplib::Client> client;

  Service() {
    store.add_channel(device_channel("bench-01"));
    const auto port = server.bind("127.0.0.1", 0);
    server.start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(10, 0);
  }
  ~Service() { server.stop(); }

  json get(const std::string& path, int expected = 200) {
    auto res = client->Get(path);
    REQUIRE(res);
    CHECK_MESSAGE(res->status == expected, path << " -> " << res->body);
    return json::parse(res->body);
  }
  httplib::Result post(const std::string& path, const json& body) {
    return client->Post(path, body.dump(), "application/json");
  }
};

void check_error_body(const json& j, const std::string& code) {
  REQUIRE(j.is_object());
  CHECK(j.at("code") == code);
  CHECK(j.at("message").is_string());
  CHECK_FALSE(j.at("message").get<std::string>().empty());
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("health, channels and unknown routes") {
  Service s;
  CHECK(s.get("/health")["status"] == "ok");
  const auto list = s.get("/channels");
  REQUIRE(list["channels"].size() == 1);
  CHECK(list["channels"][0]["channel_id"] == "bench-01");
  CHECK(s.get("/channels/bench-01")["entries"] == 0);
  check_error_body(s.get("/channels/nope/feed", 404), "not_found");
  check_error_body(s.get("/channels/nope", 404), "not_found");
  check_error_body(s.get("/nothing/here", 404), "not_found");
}

TEST_CASE("feed: ranges, limits and parameter errors") {
  Service s;
  for (int i = 0; i < 5; ++i) {
    const std::string ts = "2024-01-01T00:00:0" + std::to_string(i) + "Z";
    s.ingestor.ingest(reading(ts.c_str(), 21 + i, 40));
  }
  auto j = s.get("/channels/bench-01/feed?start=2025-01-01T00:00:00Z&end=2025-01-02T00:00:00Z");
  CHECK(j["feeds"].empty());
  CHECK(j["truncated"] == false);
  CHECK(j["channel"]["field1"] == "temperature_c");

  j = s.get("/channels/bench-01/feed?limit=2");
  REQUIRE(j["feeds"].size() == 2);
  CHECK(j["truncated"] == true);
  CHECK(j["feeds"][0]["entry_id"] == 1);
  CHECK(j["feeds"][1]["field1"] == 22);
  CHECK(j["channel"]["last_entry_id"] == 5);

  j = s.get("/channels/bench-01/feed?start=2024-01-01T01:00:00%2B01:00&end=2024-01-01T00:00:02Z");
  CHECK(j["feeds"].size() == 2);
  j = s.get("/channels/bench-01/feed?start=2024-01-01T01:00:00+01:00&end=2024-01-01T00:00:02Z");
  CHECK(j["feeds"].size() == 2);

  check_error_body(s.get("/channels/bench-01/feed?start=2024-01-02T00:00:00Z&end=2024-01-01T00:00:00Z", 400),
                   "invalid_parameter");
  check_error_body(s.get("/channels/bench-01/feed?limit=-1", 400), "invalid_parameter");
  check_error_body(s.get("/channels/bench-01/feed?start=yesterday", 400), "parse_error");
  check_error_body(s.get("/channels/bench-01/feed?agg=weekly", 400), "invalid_parameter");
}

TEST_CASE("latest salubrity") {
  Service s;
  check_error_body(s.get("/channels/bench-01/salubrity/latest", 404), "not_found");
  s.ingestor.ingest(reading("2024-01-01T00:00:00Z", 30, 70));
  s.ingestor.ingest(reading("2024-01-01T00:01:00Z", 21, 40));
  const auto j = s.get("/channels/bench-01/salubrity/latest");
  CHECK(j["value"] == 100.0);
  CHECK(j["ts"] == "2024-01-01T00:01:00Z");
}

TEST_CASE("surface endpoint") {
  Service s;
  auto j = s.get("/salubrity/surface?steps=2&t_min=17&t_max=25&h_min=28&h_max=52");
  REQUIRE(j["values"].size() == 2);
  for (const auto& row : j["values"]) {
    REQUIRE(row.size() == 2);
    for (const auto& v : row) CHECK(v.get<double>() == doctest::Approx(100 * std::exp(-1.0)).epsilon(1e-12));
  }
  j = s.get("/salubrity/surface");
  CHECK(j["values"].size() == 25);
  CHECK(j["values"][24].size() == 25);
  check_error_body(s.get("/salubrity/surface?steps=1", 400), "invalid_parameter");
  check_error_body(s.get("/salubrity/surface?steps=100000", 400), "invalid_parameter");
  check_error_body(s.get("/salubrity/surface?t_min=40&t_max=30", 400), "invalid_parameter");
  CHECK(s.get("/salubrity/config")["mu_t"] == 21.0);
}

TEST_CASE("alert configuration and events") {
  Service s;
  CHECK(s.get("/channels/bench-01/alerts/events")["events"].empty());
  auto res = s.client->Put("/channels/bench-01/alerts/config",
                           R"([{"rule_id":"s","kind":"SALUBRITY_BELOW","threshold":50,"hysteresis":5,"min_consecutive":1}])",
                           "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto cfg = json::parse(res->body);
  REQUIRE(cfg["rules"].size() == 1);

  // S = 60.7, 45.8, 51.2, 60.7
  s.ingestor.ingest(reading("2024-01-01T00:00:00Z", 25, 40));
  s.ingestor.ingest(reading("2024-01-01T00:00:10Z", 26, 40));
  s.ingestor.ingest(reading("2024-01-01T00:00:20Z", 25, 47));
  s.ingestor.ingest(reading("2024-01-01T00:00:30Z", 25, 40));
  const auto ev = s.get("/channels/bench-01/alerts/events")["events"];
  REQUIRE(ev.size() == 2);
  CHECK(ev[0]["kind"] == "RAISE");
  CHECK(ev[0]["ts"] == "2024-01-01T00:00:10Z");
  CHECK(ev[1]["kind"] == "CLEAR");
  CHECK(ev[1]["ts"] == "2024-01-01T00:00:30Z");
  CHECK(s.get("/channels/bench-01/alerts/events?start=2024-01-01T00:00:20Z")["events"].size() == 1);
  CHECK(s.get("/channels/bench-01/alerts/config")["states"]["s"]["status"] == "IDLE");

  res = s.client->Put("/channels/bench-01/alerts/config",
                      R"({"rules":[{"rule_id":"s","kind":"SALUBRITY_BELOW","threshold":50,"hysteresis":-1,"min_consecutive":1}]})",
                      "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  check_error_body(json::parse(res->body), "invalid_parameter");
  CHECK(s.get("/channels/bench-01/alerts/config")["rules"][0]["hysteresis"] == 5.0);

  res = s.client->Put("/channels/bench-01/alerts/config", "{bad", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = s.client->Put("/channels/ghost/alerts/config", "[]", "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("reports: hourly mean and json/csv agreement") {
  Service s;
  s.ingestor.ingest(reading("2024-01-01T10:05:00Z", 10, 40));
  s.ingestor.ingest(reading("2024-01-01T10:20:00Z", 20, 40));
  s.ingestor.ingest(reading("2024-01-01T10:40:00Z", 30, 40));
  auto res = s.post("/reports", {{"channel_id", "bench-01"}, {"aggregation", "HOURLY_MEAN"}, {"format", "json"}});
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const auto j = json::parse(res->body);
  REQUIRE(j["rows"].size() == 1);
  CHECK(j["columns"][1] == "temperature_c");
  CHECK(j["rows"][0][0] == "2024-01-01T10:00:00Z");
  CHECK(j["rows"][0][1] == 20.0);

  for (const char* agg : {"NONE", "HOURLY_MEAN", "HOURLY_MIN", "HOURLY_MAX"}) {
    CAPTURE(agg);
    const auto jr = json::parse(s.post("/reports", {{"channel_id", "bench-01"}, {"aggregation", agg}})->body);
    const auto cr = s.post("/reports", {{"channel_id", "bench-01"}, {"aggregation", agg}, {"format", "csv"}});
    REQUIRE(cr);
    CHECK(cr->get_header_value("Content-Type").find("text/csv") == 0);
    const auto rows = csv_rows(cr->body);
    REQUIRE(rows.size() == jr["rows"].size() + 1);
    CHECK(rows[0].size() == jr["columns"].size());
    for (std::size_t r = 0; r < jr["rows"].size(); ++r) {
      const auto& jrow = jr["rows"][r];
      CHECK(rows[r + 1][0] == jrow[0]);
      for (std::size_t c = 1; c < jrow.size(); ++c) {
        if (jrow[c].is_null()) {
          CHECK(rows[r + 1][c].empty());
        } else {
          CHECK(std::stod(rows[r + 1][c]) == jrow[c].get<double>());
        }
      }
    }
  }

  res = s.post("/reports", {{"channel_id", "bench-01"}, {"start", "2030-01-01T00:00:00Z"}, {"format", "csv"}});
  REQUIRE(res);
  CHECK(csv_rows(res->body).size() == 1);

  res = s.post("/reports", {{"channel_id", "ghost"}});
  REQUIRE(res);
  CHECK(res->status == 404);
  res = s.post("/reports", {{"start", "2024-01-01T00:00:00Z"}});
  REQUIRE(res);
  CHECK(res->status == 400);
  check_error_body(json::parse(res->body), "schema_error");
  res = s.client->Post("/reports", "nope", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
}

TEST_CASE("gas spike shows up only inside its window") {
  Service s;
  const auto scn = sim::scenario_from_json(json::parse(R"({
    "device_id": "bench-01", "start": "2024-03-04T08:00:00Z", "duration_s": 600, "sample_period_s": 10,
    "baseline": {"temp_c": 21, "hum_pct": 40, "gas_ppm": 100},
    "events": [{"kind": "GAS_SPIKE", "start_s": 200, "end_s": 320, "magnitude": 400, "ramp_s": 20}],
    "seed": 42})"));
  for (const auto& p : sim::generate_payloads(scn, {}, {})) s.ingestor.ingest(p);
  const auto j = json::parse(s.post("/reports", {{"channel_id", "bench-01"}})->body);
  REQUIRE(j["rows"].size() == 60);
  const auto t0 = airq::parse_iso8601("2024-03-04T08:00:00Z");
  const std::size_t ppm_col = j["columns"].size() - 2;
  for (const auto& row : j["rows"]) {
    const double t = std::chrono::duration<double>(airq::parse_iso8601(row[0].get<std::string>()) - t0).count();
    const double ppm = row[ppm_col].get<double>();
    CAPTURE(t);
    if (t < 200 || t >= 320) CHECK(ppm < 150);
    if (t >= 220 && t <= 300) CHECK(ppm > 400);
  }
}

TEST_CASE("reads leave the store untouched") {
  Service s;
  s.ingestor.ingest(reading("2024-01-01T00:00:00Z", 21, 40));
  const auto before = s.store.checksum();
  s.get("/channels");
  s.get("/channels/bench-01/feed?agg=HOURLY_MEAN");
  s.get("/channels/bench-01/salubrity/latest");
  s.get("/channels/bench-01/alerts/events");
  s.get("/salubrity/surface?steps=5");
  s.post("/reports", {{"channel_id", "bench-01"}, {"format", "csv"}});
  s.get("/metrics");
  CHECK(s.store.checksum() == before);
}
