#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "airq/ingest/feed_store.hpp"
#include "airq/time.hpp"

namespace airq::api {

enum class ReportFormat { kJson, kCsv };

struct ReportRequest {
  std::string channel_id;
  Timestamp start = Timestamp::min();
  Timestamp end = Timestamp::max();
  ingest::Aggregation aggregation = ingest::Aggregation::kNone;
  ReportFormat format = ReportFormat::kJson;
};

// {"channel_id", "start"?, "end"?, "aggregation"?, "format"? ("json"|"csv")}.
// Throws kSchema / kParse / kInvalidParameter with the offending field.
ReportRequest report_request_from_json(const nlohmann::json& j);

ingest::FeedQuery to_query(const ReportRequest& r);

// Column order: ts, each channel field, ppm, salubrity.
std::vector<std::string> report_columns(const ingest::Channel& channel);

// Header row always present; empty cells for absent values.
std::string report_csv(const ingest::FeedQueryResult& result);

// {"channel_id","aggregation","columns":[...],"rows":[[ts, v, ...]],"truncated"}
nlohmann::json report_json(const ingest::FeedQueryResult& result);

// Feed in the ThingSpeak style: channel metadata with field1..fieldN names
// and units, then "feeds" rows keyed by field1..fieldN.
nlohmann::json feed_json(const ingest::FeedQueryResult& result, std::uint64_t last_entry_id);

}  // namespace airq::api
