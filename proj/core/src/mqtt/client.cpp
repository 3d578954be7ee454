#include "airq/mqtt/client.hpp"

#include <charconv>

#include <spdlog/spdlog.h>

#include "airq/error.hpp"

namespace airq::mqtt {
namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(100);

const char* connack_reason(std::uint8_t code) {
  switch (code) {
    case 1: return "unacceptable protocol version";
    case 2: return "client identifier rejected";
    case 3: return "server unavailable";
    case 4: return "bad user name or password";
    case 5: return "not authorized";
    default: return "unknown CONNACK code";
  }
}

}  // namespace

BrokerUri BrokerUri::parse(const std::string& uri) {
  auto bad = [&](const std::string& why) -> BrokerUri {
    fail(ErrorCode::kInvalidParameter, "invalid broker URI '" + uri + "': " + why, {"broker"});
  };
  std::string_view rest = uri;
  if (const auto p = rest.find("://"); p != std::string_view::npos) {
    const auto scheme = rest.substr(0, p);
    if (scheme != "mqtt" && scheme != "tcp")
      return bad("unsupported scheme '" + std::string(scheme) + "' (use mqtt:// or tcp://)");
    rest.remove_prefix(p + 3);
  }
  if (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
  if (rest.find('/') != std::string_view::npos) return bad("paths are not supported");
  if (rest.find('@') != std::string_view::npos) return bad("put credentials in the config, not the URI");

  BrokerUri out;
  std::string_view host = rest;
  if (const auto colon = rest.rfind(':'); colon != std::string_view::npos) {
    host = rest.substr(0, colon);
    const auto port = rest.substr(colon + 1);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || ptr != port.data() + port.size() || value == 0 || value > 65535)
      return bad("port must be an integer in 1..65535");
    out.port = static_cast<std::uint16_t>(value);
  }
  if (host.empty()) return bad("missing host");
  out.host = std::string(host);
  return out;
}

std::string BrokerUri::to_string() const { return "mqtt://" + host + ":" + std::to_string(port); }

Client::Client(const BrokerUri& uri, ClientOptions options) : options_(std::move(options)) {
  stream_ = TcpStream::connect(uri.host, uri.port, options_.connect_timeout);

  Connect c;
  c.client_id = options_.client_id;
  c.keep_alive_s = static_cast<std::uint16_t>(options_.keep_alive.count());
  c.username = options_.username;
  c.password = options_.password;
  stream_.send_all(encode(c));
  last_send_ = std::chrono::steady_clock::now().time_since_epoch().count();

  const auto deadline = std::chrono::steady_clock::now() + options_.connect_timeout;
  for (;;) {
    if (auto p = decoder_.next()) {
      const auto* ack = std::get_if<Connack>(&*p);
      if (!ack) fail(ErrorCode::kNetwork, "broker did not answer CONNECT with CONNACK");
      if (ack->return_code != 0)
        fail(ErrorCode::kNetwork,
             std::string("broker refused connection: ") + connack_reason(ack->return_code));
      break;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) fail(ErrorCode::kNetwork, "timed out waiting for CONNACK");
    if (auto bytes = stream_.receive(left)) decoder_.feed(*bytes);
  }
  connected_ = true;
  reader_ = std::jthread([this](std::stop_token st) { reader_loop(st); });
}

Client::~Client() { disconnect(); }

void Client::on_disconnect(DisconnectHandler handler) {
  std::lock_guard lock(state_mutex_);
  disconnect_handler_ = std::move(handler);
}

void Client::send(const Packet& packet) {
  if (!connected_) fail(ErrorCode::kNetwork, "MQTT client is not connected");
  std::lock_guard lock(write_mutex_);
  stream_.send_all(encode(packet));
  last_send_ = std::chrono::steady_clock::now().time_since_epoch().count();
}

std::uint16_t Client::next_packet_id() {
  std::uint16_t id;
  do {
    id = ++packet_id_;
  } while (id == 0);
  return id;
}

Client::Pending Client::await(std::uint16_t id) {
  std::unique_lock lock(state_mutex_);
  const bool ok = state_cv_.wait_for(lock, options_.ack_timeout, [&] {
    return pending_[id].done || !connected_.load();
  });
  Pending result = pending_[id];
  pending_.erase(id);
  if (!ok) fail(ErrorCode::kNetwork, "timed out waiting for acknowledgement");
  if (!result.done) fail(ErrorCode::kNetwork, "connection lost before acknowledgement");
  return result;
}

void Client::publish(const std::string& topic, const std::string& payload, std::uint8_t qos) {
  if (qos > 1) fail(ErrorCode::kInvalidParameter, "only QoS 0 and 1 are supported", {"qos"});
  Publish p{topic, payload, qos, false, false, 0};
  if (qos == 0) {
    send(p);
    return;
  }
  p.packet_id = next_packet_id();
  {
    std::lock_guard lock(state_mutex_);
    pending_[p.packet_id] = {};
  }
  send(p);
  await(p.packet_id);
}

void Client::subscribe(const std::string& filter, std::uint8_t qos, MessageHandler handler) {
  if (!valid_topic_filter(filter))
    fail(ErrorCode::kInvalidParameter, "invalid topic filter '" + filter + "'", {"filter"});
  Subscribe s;
  s.packet_id = next_packet_id();
  s.filters.emplace_back(filter, qos);
  {
    std::lock_guard lock(state_mutex_);
    pending_[s.packet_id] = {};
    handlers_.emplace_back(filter, std::move(handler));
  }
  send(s);
  const auto ack = await(s.packet_id);
  if (ack.codes.empty() || ack.codes[0] == 0x80)
    fail(ErrorCode::kNetwork, "broker rejected subscription to '" + filter + "'");
}

void Client::disconnect() {
  if (connected_.exchange(false)) {
    try {
      std::lock_guard lock(write_mutex_);
      stream_.send_all(encode(Disconnect{}));
    } catch (const Error&) {
    }
  }
  if (reader_.joinable()) {
    reader_.request_stop();
    reader_.join();
  }
  stream_.close();
  state_cv_.notify_all();
}

void Client::connection_lost(const std::string& reason) {
  DisconnectHandler handler;
  {
    std::lock_guard lock(state_mutex_);
    if (!connected_.exchange(false)) return;
    handler = disconnect_handler_;
  }
  state_cv_.notify_all();
  spdlog::warn("mqtt: connection lost: {}", reason);
  if (handler) handler(reason);
}

void Client::reader_loop(std::stop_token stop) {
  auto& decoder = decoder_;
  const auto ping_after = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      options_.keep_alive / 2);
  try {
    while (!stop.stop_requested() && connected_) {
      if (auto bytes = stream_.receive(kPollInterval)) {
        decoder.feed(*bytes);
      } else if (options_.keep_alive.count() > 0 &&
                 std::chrono::steady_clock::now().time_since_epoch().count() - last_send_ >
                     ping_after.count()) {
        send(Pingreq{});
      }
      while (auto packet = decoder.next()) {
        if (auto* pub = std::get_if<Publish>(&*packet)) {
          std::vector<MessageHandler> matching;
          {
            std::lock_guard lock(state_mutex_);
            for (const auto& [filter, h] : handlers_)
              if (topic_matches(filter, pub->topic)) matching.push_back(h);
          }
          for (const auto& h : matching) {
            try {
              h(pub->topic, pub->payload);
            } catch (const std::exception& e) {
              spdlog::error("mqtt: message handler threw: {}", e.what());
            }
          }
          if (pub->qos == 1) send(Puback{pub->packet_id});
        } else if (auto* ack = std::get_if<Puback>(&*packet)) {
          std::lock_guard lock(state_mutex_);
          if (auto it = pending_.find(ack->packet_id); it != pending_.end()) it->second.done = true;
          state_cv_.notify_all();
        } else if (auto* sub = std::get_if<Suback>(&*packet)) {
          std::lock_guard lock(state_mutex_);
          if (auto it = pending_.find(sub->packet_id); it != pending_.end()) {
            it->second.done = true;
            it->second.codes = sub->return_codes;
          }
          state_cv_.notify_all();
        }
      }
    }
  } catch (const std::exception& e) {
    if (!stop.stop_requested()) connection_lost(e.what());
  }
}

}  // namespace airq::mqtt
