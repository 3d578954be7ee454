#include "airq/workspace.hpp"

namespace airq {

ingest::IngestorOptions ingestor_options(const ServiceConfig& cfg) {
  ingest::IngestorOptions o;
  o.salubrity = cfg.salubrity;
  o.dht = cfg.dht11;
  o.mq = cfg.mq135;
  o.default_rules = cfg.default_rules;
  o.auto_create_channels = cfg.auto_create_channels;
  return o;
}

Workspace::Workspace(const ServiceConfig& cfg) {
  store_ = std::make_unique<ingest::FeedStore>(cfg.data_dir);
  if (!cfg.data_dir.empty())
    for (const auto& c : ingest::load_channel_registry(cfg.data_dir)) store_->add_channel(c);
  for (const auto& c : cfg.channels) store_->add_channel(c);
  ingestor_ = std::make_unique<ingest::Ingestor>(*store_, ingestor_options(cfg), cfg.data_dir);
  for (const auto& [id, rules] : cfg.channel_rules) {
    if (!store_->has_channel(id)) continue;
    if (ingestor_->rules(id) != rules) ingestor_->set_rules(id, rules);
  }
}

void Workspace::ensure_device_channel(const std::string& device_id) {
  if (!store_->has_channel(device_id)) store_->add_channel(ingest::device_channel(device_id));
}

}  // namespace airq
