#include "airq/config.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "airq/error.hpp"
#include "airq/mqtt/client.hpp"

namespace airq {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  fail(ErrorCode::kConfig, "config field '" + field + "': " + what, {field});
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) config_error(path.empty() ? key : path + "." + key, "unknown field");
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& path) {
  if (!j.contains(key)) return;
  const std::string field = path.empty() ? key : path + "." + key;
  const auto& v = j[key];
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) config_error(field, "expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) config_error(field, "expected an integer");
    const auto wide = v.get<long long>();
    if (wide < static_cast<long long>(std::numeric_limits<T>::min()) ||
        wide > static_cast<long long>(std::numeric_limits<T>::max()))
      config_error(field, "integer out of range");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) config_error(field, "expected a number");
  } else {
    if (!v.is_string()) config_error(field, "expected a string");
  }
  dst = v.get<T>();
}

std::vector<ingest::AlertRule> rules_from(const json& j, const std::string& path, double scale) {
  if (!j.is_array()) config_error(path, "expected an array of alert rules");
  std::vector<ingest::AlertRule> rules;
  try {
    for (const auto& r : j) rules.push_back(ingest::alert_rule_from_json(r));
    ingest::validate_rules(rules, scale);
  } catch (const Error& e) {
    config_error(path, e.what());
  }
  return rules;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ServiceConfig config_from_json(const json& j) {
  only_keys(j, "", {"http", "data_dir", "broker", "salubrity", "dht11", "mq135", "channels",
                    "alerts", "auto_create_channels", "static_dir"});
  ServiceConfig cfg;
  if (j.contains("http")) {
    const auto& h = j["http"];
    only_keys(h, "http", {"bind", "port"});
    read(h, "bind", cfg.http.bind, "http");
    read(h, "port", cfg.http.port, "http");
  }
  if (j.contains("data_dir")) {
    std::string d;
    read(j, "data_dir", d, "");
    if (d.empty()) config_error("data_dir", "must not be empty");
    cfg.data_dir = d;
  }
  if (j.contains("broker")) {
    const auto& b = j["broker"];
    only_keys(b, "broker", {"uri", "client_id", "username", "password", "embedded"});
    read(b, "uri", cfg.broker.uri, "broker");
    read(b, "client_id", cfg.broker.client_id, "broker");
    read(b, "embedded", cfg.broker.embedded, "broker");
    if (b.contains("username")) {
      std::string u;
      read(b, "username", u, "broker");
      cfg.broker.username = u;
    }
    if (b.contains("password")) {
      std::string p;
      read(b, "password", p, "broker");
      cfg.broker.password = p;
    }
  }
  try {
    mqtt::BrokerUri::parse(cfg.broker.uri);
  } catch (const Error& e) {
    config_error("broker.uri", e.what());
  }
  if (j.contains("salubrity")) {
    const auto& s = j["salubrity"];
    only_keys(s, "salubrity", {"mu_t", "sigma_t", "mu_h", "sigma_h", "scale"});
    try {
      cfg.salubrity = salubrity::config_from_json(s);
    } catch (const Error& e) {
      config_error(e.fields().empty() ? "salubrity" : "salubrity." + e.fields()[0], e.what());
    }
  }
  if (j.contains("dht11")) {
    const auto& d = j["dht11"];
    only_keys(d, "dht11", {"t_min", "t_max", "t_resolution", "h_min", "h_max", "h_resolution",
                           "t_noise_sd", "h_noise_sd"});
    read(d, "t_min", cfg.dht11.t_min, "dht11");
    read(d, "t_max", cfg.dht11.t_max, "dht11");
    read(d, "t_resolution", cfg.dht11.t_resolution, "dht11");
    read(d, "h_min", cfg.dht11.h_min, "dht11");
    read(d, "h_max", cfg.dht11.h_max, "dht11");
    read(d, "h_resolution", cfg.dht11.h_resolution, "dht11");
    read(d, "t_noise_sd", cfg.dht11.t_noise_sd, "dht11");
    read(d, "h_noise_sd", cfg.dht11.h_noise_sd, "dht11");
    try {
      cfg.dht11.validate();
    } catch (const Error& e) {
      config_error("dht11", e.what());
    }
  }
  if (j.contains("mq135")) {
    const auto& m = j["mq135"];
    only_keys(m, "mq135", {"r0", "curve_a", "curve_b", "adc_bits", "v_ref", "load_resistance"});
    read(m, "r0", cfg.mq135.r0, "mq135");
    read(m, "curve_a", cfg.mq135.curve_a, "mq135");
    read(m, "curve_b", cfg.mq135.curve_b, "mq135");
    read(m, "adc_bits", cfg.mq135.adc_bits, "mq135");
    read(m, "v_ref", cfg.mq135.v_ref, "mq135");
    read(m, "load_resistance", cfg.mq135.load_resistance, "mq135");
    try {
      cfg.mq135.validate();
    } catch (const Error& e) {
      config_error("mq135", e.what());
    }
  }
  if (j.contains("channels")) {
    if (!j["channels"].is_array()) config_error("channels", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j["channels"].size(); ++i) {
      const std::string path = "channels[" + std::to_string(i) + "]";
      try {
        auto c = ingest::channel_from_json(j["channels"][i]);
        if (!ids.insert(c.channel_id).second) config_error(path, "duplicate channel_id '" + c.channel_id + "'");
        cfg.channels.push_back(std::move(c));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kConfig && std::string(e.what()).starts_with("config field")) throw;
        config_error(path, e.what());
      }
    }
  }
  if (j.contains("alerts")) {
    const auto& a = j["alerts"];
    only_keys(a, "alerts", {"default", "channels"});
    if (a.contains("default")) cfg.default_rules = rules_from(a["default"], "alerts.default", cfg.salubrity.scale);
    if (a.contains("channels")) {
      if (!a["channels"].is_object()) config_error("alerts.channels", "expected an object keyed by channel_id");
      for (const auto& [id, rules] : a["channels"].items())
        cfg.channel_rules[id] = rules_from(rules, "alerts.channels." + id, cfg.salubrity.scale);
    }
  }
  read(j, "auto_create_channels", cfg.auto_create_channels, "");
  if (j.contains("static_dir")) {
    std::string s;
    read(j, "static_dir", s, "");
    cfg.static_dir = s;
  }
  return cfg;
}

ServiceConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    fail(ErrorCode::kConfig, "config syntax error at line " + std::to_string(line) + ", column " +
                                 std::to_string(col) + ": " + e.what());
  }
  return config_from_json(j);
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.fields());
  }
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env) {
  if (auto v = env("AIRQ_HTTP_BIND")) cfg.http.bind = *v;
  if (auto v = env("AIRQ_HTTP_PORT")) {
    try {
      const auto port = std::stoul(*v);
      if (port > 65535) throw std::out_of_range("port");
      cfg.http.port = static_cast<std::uint16_t>(port);
    } catch (const std::exception&) {
      fail(ErrorCode::kConfig, "AIRQ_HTTP_PORT must be an integer in 0..65535", {"http.port"});
    }
  }
  if (auto v = env("AIRQ_DATA_DIR")) cfg.data_dir = *v;
  if (auto v = env("AIRQ_BROKER_URI")) {
    try {
      mqtt::BrokerUri::parse(*v);
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, std::string("AIRQ_BROKER_URI: ") + e.what(), {"broker.uri"});
    }
    cfg.broker.uri = *v;
  }
  if (auto v = env("AIRQ_BROKER_CLIENT_ID")) cfg.broker.client_id = *v;
  if (auto v = env("AIRQ_BROKER_USERNAME")) cfg.broker.username = *v;
  if (auto v = env("AIRQ_BROKER_PASSWORD")) cfg.broker.password = *v;
}

json to_json(const ServiceConfig& cfg) {
  json channels = json::array();
  for (const auto& c : cfg.channels) channels.push_back(ingest::to_json(c));
  json defaults = json::array();
  for (const auto& r : cfg.default_rules) defaults.push_back(ingest::to_json(r));
  json per_channel = json::object();
  for (const auto& [id, rules] : cfg.channel_rules) {
    json arr = json::array();
    for (const auto& r : rules) arr.push_back(ingest::to_json(r));
    per_channel[id] = arr;
  }
  json j = {{"http", {{"bind", cfg.http.bind}, {"port", cfg.http.port}}},
            {"data_dir", cfg.data_dir.string()},
            {"broker", {{"uri", cfg.broker.uri}, {"client_id", cfg.broker.client_id}, {"embedded", cfg.broker.embedded}}},
            {"salubrity", salubrity::to_json(cfg.salubrity)},
            {"channels", channels},
            {"alerts", {{"default", defaults}, {"channels", per_channel}}},
            {"auto_create_channels", cfg.auto_create_channels}};
  if (cfg.static_dir) j["static_dir"] = cfg.static_dir->string();
  return j;
}

}  // namespace airq
