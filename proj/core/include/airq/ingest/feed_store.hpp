#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "airq/ingest/channel.hpp"

namespace airq::ingest {

enum class Aggregation { kNone, kHourlyMean, kHourlyMin, kHourlyMax };

const char* to_string(Aggregation a);
// Accepts none|hourly_mean|hourly_min|hourly_max (case-insensitive).
Aggregation aggregation_from_string(const std::string& s);

struct FeedQuery {
  std::string channel_id;
  Timestamp start = Timestamp::min();
  Timestamp end = Timestamp::max();  // exclusive
  std::optional<std::size_t> max_results;
  Aggregation aggregation = Aggregation::kNone;
};

// One UTC-hour bucket; each column aggregates the values present in the bucket.
struct AggregateRow {
  Timestamp bucket;
  std::size_t count = 0;
  std::vector<std::optional<double>> values;
  std::optional<double> ppm;
  std::optional<double> salubrity;
};

struct FeedQueryResult {
  Channel channel;
  std::vector<FeedEntry> entries;     // aggregation == kNone
  std::vector<AggregateRow> buckets;  // otherwise
  bool truncated = false;
  Aggregation aggregation = Aggregation::kNone;
};

// ThingSpeak-style channel store. Each channel is an append-only JSON-lines
// log (<data_dir>/<channel_id>.jsonl) mirrored by an in-memory index that is
// rebuilt on open. Appends to a channel are exclusive; queries take a shared
// lock and therefore observe a consistent prefix of the feed.
class FeedStore {
 public:
  // Empty data_dir keeps everything in memory.
  explicit FeedStore(std::filesystem::path data_dir = {});
  ~FeedStore();
  FeedStore(const FeedStore&) = delete;
  FeedStore& operator=(const FeedStore&) = delete;

  // Registers a channel (idempotent for an identical definition) and loads any
  // persisted entries. Throws kInvalidParameter on a conflicting redefinition.
  void add_channel(const Channel& channel);
  bool has_channel(const std::string& channel_id) const;
  std::vector<Channel> channels() const;
  // Throws kNotFound.
  Channel channel(const std::string& channel_id) const;

  // Assigns the next entry_id and persists the entry. Returns nullopt when an
  // entry with the same (device_id, ts) is already stored.
  std::optional<FeedEntry> append(const std::string& channel_id, FeedEntry draft);

  // Throws kNotFound for unknown channels, kInvalidParameter when start > end.
  FeedQueryResult query(const FeedQuery& q) const;

  // Entry with the greatest ts (ties: greatest entry_id).
  std::optional<FeedEntry> latest(const std::string& channel_id) const;
  std::size_t size(const std::string& channel_id) const;
  std::size_t duplicates_dropped() const;

  // FNV-1a over every stored entry, for change detection.
  std::uint64_t checksum() const;

  const std::filesystem::path& data_dir() const { return data_dir_; }

 private:
  struct ChannelData;
  ChannelData& data(const std::string& channel_id) const;
  void load(ChannelData& cd);
  void enforce_retention(ChannelData& cd);
  void compact(ChannelData& cd);
  void save_registry() const;

  std::filesystem::path data_dir_;
  mutable std::shared_mutex channels_mutex_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<ChannelData>> channels_;
};

// Loads channel definitions persisted in <data_dir>/channels.json.
std::vector<Channel> load_channel_registry(const std::filesystem::path& data_dir);

}  // namespace airq::ingest
