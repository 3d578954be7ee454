#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "airq/time.hpp"

namespace airq::ingest {

enum class AlertKind { kSalubrityBelow, kGasPpmAbove };
enum class AlertStatus { kIdle, kRaised };
enum class AlertEventKind { kRaise, kClear, kConfigReset };

const char* to_string(AlertKind k);
const char* to_string(AlertStatus s);
const char* to_string(AlertEventKind k);

struct AlertRule {
  std::string rule_id;
  AlertKind kind = AlertKind::kSalubrityBelow;
  double threshold = 50.0;
  double hysteresis = 5.0;
  int min_consecutive = 1;

  // salubrity_scale bounds SALUBRITY_BELOW thresholds to (0, scale).
  void validate(double salubrity_scale) const;
  friend bool operator==(const AlertRule&, const AlertRule&) = default;
};

struct AlertState {
  AlertStatus status = AlertStatus::kIdle;
  int streak = 0;
  std::optional<Timestamp> raised_at;
  std::optional<Timestamp> cleared_at;
  double last_value = 0.0;
};

struct AlertEvent {
  std::string channel_id;
  std::string rule_id;
  AlertEventKind kind = AlertEventKind::kRaise;
  Timestamp ts;
  double value = 0.0;
  double threshold = 0.0;
};

// SALUBRITY_BELOW violates when value < threshold and clears once
// value >= threshold + hysteresis. GAS_PPM_ABOVE violates when
// value > threshold and clears once value <= threshold - hysteresis.
// IDLE -> RAISED when the violation streak reaches min_consecutive.
std::pair<AlertState, std::optional<AlertEvent>> evaluate_alert(const AlertRule& rule,
                                                                const AlertState& state,
                                                                double value, Timestamp ts);

// Default rule set: salubrity below 50 (hysteresis 5) and gas above 300 ppm
// (hysteresis 20). The gas limit is a placeholder, not a regulatory value.
std::vector<AlertRule> default_alert_rules();

// Validates a whole rule list (unique ids plus per-rule invariants).
void validate_rules(const std::vector<AlertRule>& rules, double salubrity_scale);

nlohmann::json to_json(const AlertRule& r);
AlertRule alert_rule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AlertState& s);
nlohmann::json to_json(const AlertEvent& e);
AlertEvent alert_event_from_json(const nlohmann::json& j);

}  // namespace airq::ingest
