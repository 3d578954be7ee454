#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "airq/ingest/alerts.hpp"
#include "airq/ingest/channel.hpp"
#include "airq/salubrity.hpp"
#include "airq/sim/dht11.hpp"
#include "airq/sim/mq135.hpp"

namespace airq {

struct HttpConfig {
  std::string bind = "127.0.0.1";
  std::uint16_t port = 8080;
};

struct BrokerConfig {
  std::string uri = "mqtt://127.0.0.1:1883";
  std::string client_id = "airq-serve";
  std::optional<std::string> username;
  std::optional<std::string> password;
  // Run the bundled broker on the URI's port instead of connecting to an
  // external one.
  bool embedded = false;
};

// Service configuration (see docs/config.md for the schema).
struct ServiceConfig {
  HttpConfig http;
  std::filesystem::path data_dir = "data";
  BrokerConfig broker;
  salubrity::SalubrityConfig salubrity;
  sim::Dht11Spec dht11;
  sim::Mq135Spec mq135;
  std::vector<ingest::Channel> channels;
  std::vector<ingest::AlertRule> default_rules = ingest::default_alert_rules();
  std::map<std::string, std::vector<ingest::AlertRule>> channel_rules;
  bool auto_create_channels = false;
  std::optional<std::filesystem::path> static_dir;
};

// Throws Error{kConfig} with "line L, column C" for syntax errors and the
// dotted field path for schema errors.
ServiceConfig parse_config(const std::string& text);
ServiceConfig load_config(const std::filesystem::path& path);
ServiceConfig config_from_json(const nlohmann::json& j);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// AIRQ_HTTP_BIND, AIRQ_HTTP_PORT, AIRQ_DATA_DIR, AIRQ_BROKER_URI,
// AIRQ_BROKER_CLIENT_ID, AIRQ_BROKER_USERNAME, AIRQ_BROKER_PASSWORD.
void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env = process_env);

nlohmann::json to_json(const ServiceConfig& cfg);

}  // namespace airq
