#include "airq/ingest/ingestor.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "airq/sim/mq135.hpp"

namespace airq::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

FeedEntry make_entry(const sim::WirePayload& payload, const Channel& channel,
                     const salubrity::SalubrityConfig& cfg, const sim::Mq135Spec& mq) {
  FeedEntry e;
  e.ts = payload.ts;
  e.device_id = payload.device_id;
  e.flags = payload.flags;
  e.values.resize(channel.fields.size());
  auto put = [&](const char* name, double v) {
    if (auto i = channel.field_index(name)) e.values[*i] = v;
  };
  put("temperature_c", payload.temperature_c);
  put("humidity_pct", payload.humidity_pct);
  put("mq135_adc", payload.mq135_adc);
  try {
    e.derived_ppm = sim::mq135_ppm_from_adc(payload.mq135_adc, mq);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kSaturatedReading) throw;
    e.flags.emplace_back("GAS_SATURATED");
  }
  e.derived_salubrity = salubrity::salubrity(payload.temperature_c, payload.humidity_pct, cfg);
  return e;
}

DeadLetterLog::DeadLetterLog(fs::path path) : path_(std::move(path)) {
  if (!path_.empty()) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    out_.open(path_, std::ios::app);
    if (!out_) fail(ErrorCode::kIo, "cannot open dead-letter log '" + path_.string() + "'");
  }
}

void DeadLetterLog::record(DeadLetter letter) {
  std::lock_guard lock(mutex_);
  ++total_;
  if (out_.is_open()) {
    json j = {{"received", format_iso8601(letter.received)},
              {"topic", letter.topic},
              {"payload", letter.payload},
              {"error", std::string(to_string(letter.code))},
              {"reason", letter.reason}};
    // Raw payloads may not be valid UTF-8.
    out_ << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    out_.flush();
  }
  recent_.push_back(std::move(letter));
  if (recent_.size() > kKeep) recent_.erase(recent_.begin());
}

std::size_t DeadLetterLog::size() const {
  std::lock_guard lock(mutex_);
  return total_;
}

std::vector<DeadLetter> DeadLetterLog::recent() const {
  std::lock_guard lock(mutex_);
  return recent_;
}

Ingestor::Ingestor(FeedStore& store, IngestorOptions options, fs::path data_dir)
    : store_(store),
      options_(std::move(options)),
      limits_(PayloadLimits::from(options_.dht, options_.mq)),
      data_dir_(std::move(data_dir)),
      dead_letters_(data_dir_.empty() ? fs::path{} : data_dir_ / "dead_letter.jsonl") {
  options_.salubrity.validate();
  options_.mq.validate();
  validate_rules(options_.default_rules, options_.salubrity.scale);
}

Ingestor::Runtime& Ingestor::runtime(const std::string& channel_id) const {
  {
    std::shared_lock lock(runtimes_mutex_);
    if (auto it = runtimes_.find(channel_id); it != runtimes_.end()) return *it->second;
  }
  if (!store_.has_channel(channel_id))
    fail(ErrorCode::kNotFound, "unknown channel '" + channel_id + "'", {"channel_id"});
  std::unique_lock lock(runtimes_mutex_);
  auto& slot = runtimes_[channel_id];
  if (!slot) {
    slot = std::make_unique<Runtime>();
    load_runtime(channel_id, *slot);
  }
  return *slot;
}

void Ingestor::load_runtime(const std::string& channel_id, Runtime& rt) const {
  rt.rules = options_.default_rules;
  if (data_dir_.empty()) return;
  if (std::ifstream in(data_dir_ / (channel_id + ".rules.json")); in) {
    try {
      std::vector<AlertRule> rules;
      for (const auto& r : json::parse(in)) rules.push_back(alert_rule_from_json(r));
      validate_rules(rules, options_.salubrity.scale);
      rt.rules = std::move(rules);
    } catch (const std::exception& e) {
      spdlog::warn("ingest: ignoring stored rules for '{}': {}", channel_id, e.what());
    }
  }
  if (std::ifstream in(data_dir_ / (channel_id + ".alerts.jsonl")); in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        rt.events.push_back(alert_event_from_json(json::parse(line)));
      } catch (const std::exception& e) {
        spdlog::warn("ingest: skipping unreadable alert event for '{}': {}", channel_id, e.what());
      }
    }
  }
  // Resume RAISED state from the last persisted event of each rule.
  for (const auto& e : rt.events) {
    auto& st = rt.states[e.rule_id];
    if (e.kind == AlertEventKind::kRaise) {
      st.status = AlertStatus::kRaised;
      st.raised_at = e.ts;
    } else {
      st.status = AlertStatus::kIdle;
      if (e.kind == AlertEventKind::kClear) st.cleared_at = e.ts;
    }
    st.last_value = e.value;
    st.streak = 0;
  }
}

void Ingestor::persist_rules(const std::string& channel_id, const Runtime& rt) const {
  if (data_dir_.empty()) return;
  json arr = json::array();
  for (const auto& r : rt.rules) arr.push_back(to_json(r));
  const auto path = data_dir_ / (channel_id + ".rules.json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << arr.dump(2) << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

void Ingestor::persist_event(const AlertEvent& e) const {
  if (data_dir_.empty()) return;
  std::lock_guard lock(events_file_mutex_);
  std::ofstream out(data_dir_ / (e.channel_id + ".alerts.jsonl"), std::ios::app);
  out << to_json(e).dump() << '\n';
}

void Ingestor::dead_letter(std::string_view topic, std::string_view bytes, const Error& e) {
  dead_letters_.record({now_utc(), std::string(topic), std::string(bytes), e.code(), e.what()});
}

IngestResult Ingestor::ingest(const sim::WirePayload& payload) {
  const auto& channel_id = payload.device_id;
  if (!store_.has_channel(channel_id)) {
    if (options_.auto_create_channels) {
      store_.add_channel(device_channel(channel_id));
    } else {
      ++routing_errors_;
      Error err(ErrorCode::kRouting, "no channel for device '" + channel_id + "'", {"device_id"});
      dead_letter(sim::reading_topic(channel_id), sim::serialize(payload), err);
      throw err;
    }
  }
  const Channel channel = store_.channel(channel_id);
  auto& rt = runtime(channel_id);

  std::lock_guard lock(rt.mutex);
  IngestResult result;
  result.entry = store_.append(channel_id, make_entry(payload, channel, options_.salubrity, options_.mq));
  if (!result.entry) {
    ++duplicates_;
    return result;
  }
  ++ingested_;

  const auto& entry = *result.entry;
  for (const auto& rule : rt.rules) {
    std::optional<double> value;
    if (rule.kind == AlertKind::kSalubrityBelow && entry.derived_salubrity)
      value = entry.derived_salubrity->value;
    else if (rule.kind == AlertKind::kGasPpmAbove)
      value = entry.derived_ppm;
    if (!value) continue;  // saturated gas reading: state unchanged
    auto [next, event] = evaluate_alert(rule, rt.states[rule.rule_id], *value, entry.ts);
    rt.states[rule.rule_id] = next;
    if (event) {
      event->channel_id = channel_id;
      spdlog::info("alert {} {} on {}: value {} threshold {}", to_string(event->kind), rule.rule_id,
                   channel_id, event->value, event->threshold);
      rt.events.push_back(*event);
      persist_event(*event);
      result.events.push_back(*event);
    }
  }
  return result;
}

IngestOutcome Ingestor::handle_message(std::string_view topic, std::string_view bytes) {
  ++received_;
  sim::WirePayload payload;
  try {
    payload = parse_payload(bytes, limits_);
  } catch (const Error& e) {
    ++rejected_;
    spdlog::warn("ingest: rejected message on '{}': {} ({})", topic, e.what(), to_string(e.code()));
    dead_letter(topic, bytes, e);
    return IngestOutcome::kRejected;
  }

  // workshop/{device_id}/reading must agree with the payload's device_id.
  constexpr std::string_view prefix = "workshop/";
  constexpr std::string_view suffix = "/reading";
  if (topic.starts_with(prefix) && topic.ends_with(suffix) && topic.size() > prefix.size() + suffix.size()) {
    const auto device = topic.substr(prefix.size(), topic.size() - prefix.size() - suffix.size());
    if (device != payload.device_id) {
      ++routing_errors_;
      Error err(ErrorCode::kRouting,
                "topic device '" + std::string(device) + "' does not match payload device_id '" +
                    payload.device_id + "'",
                {"device_id"});
      spdlog::warn("ingest: {}", err.what());
      dead_letter(topic, bytes, err);
      return IngestOutcome::kDeadLettered;
    }
  }

  try {
    const auto r = ingest(payload);
    return r.entry ? IngestOutcome::kIngested : IngestOutcome::kDuplicate;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRouting) dead_letter(topic, bytes, e);
    spdlog::warn("ingest: {} ({})", e.what(), to_string(e.code()));
    return IngestOutcome::kDeadLettered;
  } catch (const std::exception& e) {
    dead_letter(topic, bytes, Error(ErrorCode::kIo, e.what()));
    spdlog::error("ingest: {}", e.what());
    return IngestOutcome::kDeadLettered;
  }
}

void Ingestor::set_rules(const std::string& channel_id, std::vector<AlertRule> rules) {
  validate_rules(rules, options_.salubrity.scale);
  auto& rt = runtime(channel_id);
  std::lock_guard lock(rt.mutex);
  std::map<std::string, AlertState> states;
  const auto now = now_utc();
  for (const auto& old : rt.rules) {
    const auto it = std::find_if(rules.begin(), rules.end(),
                                 [&](const AlertRule& r) { return r.rule_id == old.rule_id; });
    const auto& st = rt.states[old.rule_id];
    if (it != rules.end() && *it == old) {
      states[old.rule_id] = st;
      continue;
    }
    if (st.status == AlertStatus::kRaised || st.streak > 0) {
      AlertEvent e{channel_id, old.rule_id, AlertEventKind::kConfigReset, now, st.last_value, old.threshold};
      rt.events.push_back(e);
      persist_event(e);
    }
  }
  rt.rules = std::move(rules);
  rt.states = std::move(states);
  persist_rules(channel_id, rt);
}

std::vector<AlertRule> Ingestor::rules(const std::string& channel_id) const {
  auto& rt = runtime(channel_id);
  std::lock_guard lock(rt.mutex);
  return rt.rules;
}

std::map<std::string, AlertState> Ingestor::states(const std::string& channel_id) const {
  auto& rt = runtime(channel_id);
  std::lock_guard lock(rt.mutex);
  std::map<std::string, AlertState> out;
  for (const auto& r : rt.rules) {
    auto it = rt.states.find(r.rule_id);
    out[r.rule_id] = it == rt.states.end() ? AlertState{} : it->second;
  }
  return out;
}

std::vector<AlertEvent> Ingestor::events(const std::string& channel_id, Timestamp start, Timestamp end) const {
  if (start > end) fail(ErrorCode::kInvalidParameter, "event range is inverted (start > end)", {"start", "end"});
  auto& rt = runtime(channel_id);
  std::lock_guard lock(rt.mutex);
  std::vector<AlertEvent> out;
  for (const auto& e : rt.events)
    if (e.ts >= start && e.ts < end) out.push_back(e);
  return out;
}

IngestMetrics Ingestor::metrics() const {
  IngestMetrics m;
  m.received = received_;
  m.ingested = ingested_;
  m.duplicates = duplicates_;
  m.rejected = rejected_;
  m.routing_errors = routing_errors_;
  m.dead_lettered = dead_letters_.size();
  return m;
}

}  // namespace airq::ingest
