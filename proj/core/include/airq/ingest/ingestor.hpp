#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "airq/error.hpp"
#include "airq/ingest/alerts.hpp"
#include "airq/ingest/feed_store.hpp"
#include "airq/ingest/payload_parser.hpp"
#include "airq/salubrity.hpp"
#include "airq/sim/dht11.hpp"
#include "airq/sim/mq135.hpp"
#include "airq/sim/payload.hpp"

namespace airq::ingest {

// Builds the feed entry for a payload: field values by name, derived ppm
// (absent with flag GAS_SATURATED when the ADC code is saturated) and the
// salubrity score.
FeedEntry make_entry(const sim::WirePayload& payload, const Channel& channel,
                     const salubrity::SalubrityConfig& cfg, const sim::Mq135Spec& mq);

struct DeadLetter {
  Timestamp received;
  std::string topic;
  std::string payload;
  ErrorCode code;
  std::string reason;
};

// Rejected payloads, appended as JSON lines when a path is configured.
class DeadLetterLog {
 public:
  explicit DeadLetterLog(std::filesystem::path path = {});
  void record(DeadLetter letter);
  std::size_t size() const;
  std::vector<DeadLetter> recent() const;  // last kKeep letters

  static constexpr std::size_t kKeep = 1000;

 private:
  mutable std::mutex mutex_;
  std::filesystem::path path_;
  std::ofstream out_;
  std::vector<DeadLetter> recent_;
  std::size_t total_ = 0;
};

struct IngestMetrics {
  std::size_t received = 0;
  std::size_t ingested = 0;
  std::size_t duplicates = 0;
  std::size_t rejected = 0;  // parse, schema and range errors
  std::size_t routing_errors = 0;
  std::size_t dead_lettered = 0;
};

struct IngestorOptions {
  salubrity::SalubrityConfig salubrity;
  sim::Dht11Spec dht;
  sim::Mq135Spec mq;
  std::vector<AlertRule> default_rules = default_alert_rules();
  // Create a device channel the first time an unknown device reports.
  bool auto_create_channels = false;
};

struct IngestResult {
  std::optional<FeedEntry> entry;  // empty for a dropped duplicate
  std::vector<AlertEvent> events;
};

enum class IngestOutcome { kIngested, kDuplicate, kRejected, kDeadLettered };

// Validates, routes and stores payloads and runs alert evaluation inside the
// channel's serialized ingest path.
class Ingestor {
 public:
  Ingestor(FeedStore& store, IngestorOptions options, std::filesystem::path data_dir = {});

  // MQTT entry point. Never throws: every failure is counted and dead-lettered.
  IngestOutcome handle_message(std::string_view topic, std::string_view bytes);

  // Routes on device_id. Throws Error{kRouting} (after dead-lettering) for an
  // unknown channel.
  IngestResult ingest(const sim::WirePayload& payload);

  // Replaces the rule set atomically. Changed or removed rules that were in
  // flight reset to IDLE with a CONFIG_RESET event. Throws kInvalidParameter
  // (invalid rules) or kNotFound (unknown channel).
  void set_rules(const std::string& channel_id, std::vector<AlertRule> rules);
  std::vector<AlertRule> rules(const std::string& channel_id) const;
  std::map<std::string, AlertState> states(const std::string& channel_id) const;
  // Events with start <= ts < end, in emission order.
  std::vector<AlertEvent> events(const std::string& channel_id, Timestamp start = Timestamp::min(),
                                 Timestamp end = Timestamp::max()) const;

  IngestMetrics metrics() const;
  const DeadLetterLog& dead_letters() const { return dead_letters_; }
  const IngestorOptions& options() const { return options_; }
  FeedStore& store() { return store_; }

 private:
  struct Runtime {
    mutable std::mutex mutex;  // serializes ingest + alert evaluation + rule updates
    std::vector<AlertRule> rules;
    std::map<std::string, AlertState> states;
    std::vector<AlertEvent> events;
  };

  Runtime& runtime(const std::string& channel_id) const;
  void load_runtime(const std::string& channel_id, Runtime& rt) const;
  void persist_rules(const std::string& channel_id, const Runtime& rt) const;
  void persist_event(const AlertEvent& e) const;
  void dead_letter(std::string_view topic, std::string_view bytes, const Error& e);

  FeedStore& store_;
  IngestorOptions options_;
  PayloadLimits limits_;
  std::filesystem::path data_dir_;
  DeadLetterLog dead_letters_;

  mutable std::shared_mutex runtimes_mutex_;
  mutable std::map<std::string, std::unique_ptr<Runtime>> runtimes_;
  mutable std::mutex events_file_mutex_;

  std::atomic<std::size_t> received_{0};
  std::atomic<std::size_t> ingested_{0};
  std::atomic<std::size_t> duplicates_{0};
  std::atomic<std::size_t> rejected_{0};
  std::atomic<std::size_t> routing_errors_{0};
};

}  // namespace airq::ingest
