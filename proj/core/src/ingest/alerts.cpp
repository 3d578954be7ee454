#include "airq/ingest/alerts.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "airq/error.hpp"

namespace airq::ingest {

using nlohmann::json;

const char* to_string(AlertKind k) {
  return k == AlertKind::kSalubrityBelow ? "SALUBRITY_BELOW" : "GAS_PPM_ABOVE";
}
const char* to_string(AlertStatus s) { return s == AlertStatus::kIdle ? "IDLE" : "RAISED"; }
const char* to_string(AlertEventKind k) {
  switch (k) {
    case AlertEventKind::kRaise: return "RAISE";
    case AlertEventKind::kClear: return "CLEAR";
    case AlertEventKind::kConfigReset: return "CONFIG_RESET";
  }
  return "?";
}

void AlertRule::validate(double salubrity_scale) const {
  if (rule_id.empty()) fail(ErrorCode::kInvalidParameter, "rule_id must not be empty", {"rule_id"});
  if (!std::isfinite(threshold))
    fail(ErrorCode::kInvalidParameter, "threshold must be finite", {"threshold"});
  if (!std::isfinite(hysteresis) || hysteresis < 0)
    fail(ErrorCode::kInvalidParameter, "hysteresis must be >= 0", {"hysteresis"});
  if (min_consecutive < 1)
    fail(ErrorCode::kInvalidParameter, "min_consecutive must be >= 1", {"min_consecutive"});
  if (kind == AlertKind::kSalubrityBelow && !(threshold > 0 && threshold < salubrity_scale))
    fail(ErrorCode::kInvalidParameter, "SALUBRITY_BELOW threshold must lie in (0, scale)", {"threshold"});
  if (kind == AlertKind::kGasPpmAbove && !(threshold > 0))
    fail(ErrorCode::kInvalidParameter, "GAS_PPM_ABOVE threshold must be > 0", {"threshold"});
}

std::pair<AlertState, std::optional<AlertEvent>> evaluate_alert(const AlertRule& rule,
                                                                const AlertState& state,
                                                                double value, Timestamp ts) {
  const bool below = rule.kind == AlertKind::kSalubrityBelow;
  const bool violating = below ? value < rule.threshold : value > rule.threshold;
  const bool clears = below ? value >= rule.threshold + rule.hysteresis
                            : value <= rule.threshold - rule.hysteresis;

  AlertState next = state;
  next.last_value = value;
  next.streak = violating ? state.streak + 1 : 0;

  std::optional<AlertEvent> event;
  auto emit = [&](AlertEventKind kind) {
    event = AlertEvent{"", rule.rule_id, kind, ts, value, rule.threshold};
  };
  if (state.status == AlertStatus::kIdle) {
    if (violating && next.streak >= rule.min_consecutive) {
      next.status = AlertStatus::kRaised;
      next.raised_at = ts;
      emit(AlertEventKind::kRaise);
    }
  } else if (clears) {
    next.status = AlertStatus::kIdle;
    next.cleared_at = ts;
    emit(AlertEventKind::kClear);
  }
  return {next, event};
}

std::vector<AlertRule> default_alert_rules() {
  return {{"salubrity", AlertKind::kSalubrityBelow, 50.0, 5.0, 1},
          {"gas", AlertKind::kGasPpmAbove, 300.0, 20.0, 1}};
}

void validate_rules(const std::vector<AlertRule>& rules, double salubrity_scale) {
  std::set<std::string> ids;
  for (const auto& r : rules) {
    r.validate(salubrity_scale);
    if (!ids.insert(r.rule_id).second)
      fail(ErrorCode::kInvalidParameter, "duplicate rule_id '" + r.rule_id + "'", {"rule_id"});
  }
}

json to_json(const AlertRule& r) {
  return {{"rule_id", r.rule_id}, {"kind", to_string(r.kind)}, {"threshold", r.threshold},
          {"hysteresis", r.hysteresis}, {"min_consecutive", r.min_consecutive}};
}

AlertRule alert_rule_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidParameter, "alert rule must be an object");
  AlertRule r;
  auto field_error = [](const char* f) {
    fail(ErrorCode::kInvalidParameter, std::string("alert rule field '") + f + "' is missing or mistyped", {f});
  };
  if (!j.contains("rule_id") || !j["rule_id"].is_string()) field_error("rule_id");
  r.rule_id = j["rule_id"].get<std::string>();
  if (!j.contains("kind") || !j["kind"].is_string()) field_error("kind");
  const auto kind = j["kind"].get<std::string>();
  if (kind == "SALUBRITY_BELOW")
    r.kind = AlertKind::kSalubrityBelow;
  else if (kind == "GAS_PPM_ABOVE")
    r.kind = AlertKind::kGasPpmAbove;
  else
    fail(ErrorCode::kInvalidParameter, "unknown alert kind '" + kind + "'", {"kind"});
  if (!j.contains("threshold") || !j["threshold"].is_number()) field_error("threshold");
  r.threshold = j["threshold"].get<double>();
  if (j.contains("hysteresis")) {
    if (!j["hysteresis"].is_number()) field_error("hysteresis");
    r.hysteresis = j["hysteresis"].get<double>();
  } else {
    r.hysteresis = 0.0;
  }
  if (j.contains("min_consecutive")) {
    if (!j["min_consecutive"].is_number_integer()) field_error("min_consecutive");
    r.min_consecutive = j["min_consecutive"].get<int>();
  }
  return r;
}

json to_json(const AlertState& s) {
  json j = {{"status", to_string(s.status)}, {"streak", s.streak}, {"last_value", s.last_value}};
  j["raised_at"] = s.raised_at ? json(format_iso8601(*s.raised_at)) : json(nullptr);
  j["cleared_at"] = s.cleared_at ? json(format_iso8601(*s.cleared_at)) : json(nullptr);
  return j;
}

json to_json(const AlertEvent& e) {
  return {{"channel_id", e.channel_id}, {"rule_id", e.rule_id}, {"kind", to_string(e.kind)},
          {"ts", format_iso8601(e.ts)},  {"value", e.value},     {"threshold", e.threshold}};
}

AlertEvent alert_event_from_json(const json& j) {
  AlertEvent e;
  e.channel_id = j.at("channel_id").get<std::string>();
  e.rule_id = j.at("rule_id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  e.kind = kind == "RAISE" ? AlertEventKind::kRaise
           : kind == "CLEAR" ? AlertEventKind::kClear
                             : AlertEventKind::kConfigReset;
  e.ts = parse_iso8601(j.at("ts").get<std::string>());
  e.value = j.at("value").get<double>();
  e.threshold = j.at("threshold").get<double>();
  return e;
}

}  // namespace airq::ingest
