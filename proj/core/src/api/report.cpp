#include "airq/api/report.hpp"

#include <nlohmann/json.hpp>

#include "airq/error.hpp"
#include "airq/format.hpp"

namespace airq::api {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string field_key(std::size_t i) { return "field" + std::to_string(i + 1); }

Timestamp ts_field(const json& j, const char* key) {
  if (!j[key].is_string()) fail(ErrorCode::kSchema, std::string(key) + " must be an ISO-8601 string", {key});
  try {
    return parse_iso8601(j[key].get<std::string>());
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string(key) + ": " + e.what(), {key});
  }
}

}  // namespace

ReportRequest report_request_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kSchema, "report request must be a JSON object");
  ReportRequest r;
  if (!j.contains("channel_id") || !j["channel_id"].is_string())
    fail(ErrorCode::kSchema, "channel_id is required", {"channel_id"});
  r.channel_id = j["channel_id"].get<std::string>();
  if (j.contains("start")) r.start = ts_field(j, "start");
  if (j.contains("end")) r.end = ts_field(j, "end");
  if (r.start > r.end) fail(ErrorCode::kInvalidParameter, "start is after end", {"start"});
  if (j.contains("aggregation")) {
    if (!j["aggregation"].is_string())
      fail(ErrorCode::kSchema, "aggregation must be a string", {"aggregation"});
    r.aggregation = ingest::aggregation_from_string(j["aggregation"].get<std::string>());
  }
  if (j.contains("format")) {
    const auto f = j["format"].is_string() ? j["format"].get<std::string>() : std::string{};
    if (f == "json" || f == "JSON") {
      r.format = ReportFormat::kJson;
    } else if (f == "csv" || f == "CSV") {
      r.format = ReportFormat::kCsv;
    } else {
      fail(ErrorCode::kInvalidParameter, "format must be json or csv", {"format"});
    }
  }
  return r;
}

ingest::FeedQuery to_query(const ReportRequest& r) {
  ingest::FeedQuery q;
  q.channel_id = r.channel_id;
  q.start = r.start;
  q.end = r.end;
  q.aggregation = r.aggregation;
  return q;
}

std::vector<std::string> report_columns(const ingest::Channel& channel) {
  std::vector<std::string> cols{"ts"};
  for (const auto& f : channel.fields) cols.push_back(f.name);
  cols.push_back("ppm");
  cols.push_back("salubrity");
  return cols;
}

std::string report_csv(const ingest::FeedQueryResult& result) {
  std::string out = csv_record(report_columns(result.channel));
  auto row = [&](Timestamp ts, const std::vector<std::optional<double>>& values,
                 const std::optional<double>& ppm, const std::optional<double>& sal) {
    std::vector<std::string> cells{format_iso8601(ts)};
    for (const auto& v : values) cells.push_back(format_optional(v));
    cells.push_back(format_optional(ppm));
    cells.push_back(format_optional(sal));
    out += csv_record(cells);
  };
  if (result.aggregation == ingest::Aggregation::kNone) {
    for (const auto& e : result.entries) {
      std::optional<double> sal;
      if (e.derived_salubrity) sal = e.derived_salubrity->value;
      row(e.ts, e.values, e.derived_ppm, sal);
    }
  } else {
    for (const auto& b : result.buckets) row(b.bucket, b.values, b.ppm, b.salubrity);
  }
  return out;
}

json report_json(const ingest::FeedQueryResult& result) {
  json rows = json::array();
  auto row = [&](Timestamp ts, const std::vector<std::optional<double>>& values,
                 const std::optional<double>& ppm, const std::optional<double>& sal) {
    json r = json::array({format_iso8601(ts)});
    for (const auto& v : values) r.push_back(opt(v));
    r.push_back(opt(ppm));
    r.push_back(opt(sal));
    rows.push_back(std::move(r));
  };
  if (result.aggregation == ingest::Aggregation::kNone) {
    for (const auto& e : result.entries) {
      std::optional<double> sal;
      if (e.derived_salubrity) sal = e.derived_salubrity->value;
      row(e.ts, e.values, e.derived_ppm, sal);
    }
  } else {
    for (const auto& b : result.buckets) row(b.bucket, b.values, b.ppm, b.salubrity);
  }
  return {{"channel_id", result.channel.channel_id},
          {"aggregation", ingest::to_string(result.aggregation)},
          {"columns", report_columns(result.channel)},
          {"rows", std::move(rows)},
          {"truncated", result.truncated}};
}

json feed_json(const ingest::FeedQueryResult& result, std::uint64_t last_entry_id) {
  const auto& c = result.channel;
  json channel = {{"id", c.channel_id}, {"name", c.name}, {"last_entry_id", last_entry_id}};
  json fields = json::array();
  for (std::size_t i = 0; i < c.fields.size(); ++i) {
    channel[field_key(i)] = c.fields[i].name;
    fields.push_back({{"key", field_key(i)}, {"name", c.fields[i].name}, {"unit", c.fields[i].unit}});
  }
  channel["fields"] = std::move(fields);

  json feeds = json::array();
  if (result.aggregation == ingest::Aggregation::kNone) {
    for (const auto& e : result.entries) {
      json f = {{"entry_id", e.entry_id}, {"created_at", format_iso8601(e.ts)}, {"device_id", e.device_id}};
      for (std::size_t i = 0; i < e.values.size(); ++i) f[field_key(i)] = opt(e.values[i]);
      f["ppm"] = opt(e.derived_ppm);
      f["salubrity"] = e.derived_salubrity ? json(e.derived_salubrity->value) : json(nullptr);
      f["flags"] = e.flags;
      feeds.push_back(std::move(f));
    }
  } else {
    for (const auto& b : result.buckets) {
      json f = {{"created_at", format_iso8601(b.bucket)}, {"count", b.count}};
      for (std::size_t i = 0; i < b.values.size(); ++i) f[field_key(i)] = opt(b.values[i]);
      f["ppm"] = opt(b.ppm);
      f["salubrity"] = opt(b.salubrity);
      feeds.push_back(std::move(f));
    }
  }
  return {{"channel", std::move(channel)},
          {"feeds", std::move(feeds)},
          {"aggregation", ingest::to_string(result.aggregation)},
          {"truncated", result.truncated}};
}

}  // namespace airq::api
