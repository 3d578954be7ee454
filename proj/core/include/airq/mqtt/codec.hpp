#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

// MQTT 3.1.1 packet model and codec. Covers the subset needed for QoS 0/1
// telemetry: CONNECT/CONNACK, PUBLISH/PUBACK, SUBSCRIBE/SUBACK, PINGREQ/PINGRESP
// and DISCONNECT. QoS 2 flows and UNSUBSCRIBE are rejected as protocol errors.
namespace airq::mqtt {

struct Connect {
  std::string client_id;
  std::uint16_t keep_alive_s = 30;
  bool clean_session = true;
  std::optional<std::string> username;
  std::optional<std::string> password;
};

struct Connack {
  bool session_present = false;
  std::uint8_t return_code = 0;
};

struct Publish {
  std::string topic;
  std::string payload;
  std::uint8_t qos = 0;
  bool dup = false;
  bool retain = false;
  std::uint16_t packet_id = 0;  // QoS > 0 only
};

struct Puback {
  std::uint16_t packet_id = 0;
};

struct Subscribe {
  std::uint16_t packet_id = 0;
  std::vector<std::pair<std::string, std::uint8_t>> filters;
};

struct Suback {
  std::uint16_t packet_id = 0;
  std::vector<std::uint8_t> return_codes;  // granted QoS or 0x80 on failure
};

struct Pingreq {};
struct Pingresp {};
struct Disconnect {};

using Packet =
    std::variant<Connect, Connack, Publish, Puback, Subscribe, Suback, Pingreq, Pingresp, Disconnect>;

std::string encode(const Packet& packet);

// Incremental decoder over a byte stream. Throws Error{kProtocol} on malformed
// input; the connection should be dropped afterwards.
class Decoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  std::optional<Packet> next();

 private:
  std::string buffer_;
};

// Topic filter matching with '+' (one level) and '#' (remaining levels).
bool topic_matches(std::string_view filter, std::string_view topic);

bool valid_topic_filter(std::string_view filter);

}  // namespace airq::mqtt
