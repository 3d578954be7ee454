#pragma once

#include <memory>

#include "airq/config.hpp"
#include "airq/ingest/feed_store.hpp"
#include "airq/ingest/ingestor.hpp"

namespace airq {

// Store and ingestor opened from a service config: the persisted channel
// registry is loaded first, then config channels and per-channel rules are
// applied on top. An empty data_dir gives an in-memory workspace.
class Workspace {
 public:
  explicit Workspace(const ServiceConfig& cfg);

  ingest::FeedStore& store() { return *store_; }
  ingest::Ingestor& ingestor() { return *ingestor_; }

  // Registers the standard device channel unless a channel with that id exists.
  void ensure_device_channel(const std::string& device_id);

 private:
  std::unique_ptr<ingest::FeedStore> store_;
  std::unique_ptr<ingest::Ingestor> ingestor_;
};

ingest::IngestorOptions ingestor_options(const ServiceConfig& cfg);

}  // namespace airq
