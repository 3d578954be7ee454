#include "airq/mqtt/broker.hpp"

#include <algorithm>
#include <vector>

#include <spdlog/spdlog.h>

#include "airq/error.hpp"
#include "airq/mqtt/codec.hpp"

namespace airq::mqtt {

struct Broker::Session {
  explicit Session(TcpStream s) : stream(std::move(s)) {}

  void send(const Packet& p) {
    std::lock_guard lock(write_mutex);
    stream.send_all(encode(p));
  }
  std::uint16_t next_id() {
    std::lock_guard lock(write_mutex);
    if (++packet_id == 0) packet_id = 1;
    return packet_id;
  }

  TcpStream stream;
  std::mutex write_mutex;
  std::uint16_t packet_id = 0;
  std::string client_id;
  std::mutex subs_mutex;
  std::vector<std::pair<std::string, std::uint8_t>> subscriptions;
};

Broker::Broker(std::string host, std::uint16_t port)
    : host_(std::move(host)), listener_(host_, port) {
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

Broker::~Broker() { stop(); }

std::string Broker::uri() const { return "mqtt://" + host_ + ":" + std::to_string(port()); }

std::size_t Broker::connected_clients() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

void Broker::stop() {
  if (acceptor_.joinable()) {
    acceptor_.request_stop();
    acceptor_.join();
  }
  listener_.close();
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto& s : sessions_) s->stream.shutdown();
  }
  for (auto& w : workers_) w.request_stop();
  workers_.clear();  // joins
}

void Broker::accept_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    auto stream = listener_.accept(std::chrono::milliseconds(100));
    if (!stream) continue;
    auto session = std::make_shared<Session>(std::move(*stream));
    {
      std::lock_guard lock(sessions_mutex_);
      sessions_.push_back(session);
    }
    workers_.emplace_back([this, session](std::stop_token st) { serve(session, st); });
  }
}

void Broker::serve(std::shared_ptr<Session> session, std::stop_token stop) {
  Decoder decoder;
  bool connected = false;
  const auto connect_deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  try {
    while (!stop.stop_requested()) {
      if (!connected && std::chrono::steady_clock::now() > connect_deadline) break;
      if (auto bytes = session->stream.receive(std::chrono::milliseconds(100))) decoder.feed(*bytes);
      bool closing = false;
      while (auto packet = decoder.next()) {
        if (!connected) {
          const auto* c = std::get_if<Connect>(&*packet);
          if (!c) {
            closing = true;
            break;
          }
          session->client_id = c->client_id;
          session->send(Connack{false, 0});
          connected = true;
          continue;
        }
        if (auto* pub = std::get_if<Publish>(&*packet)) {
          route(pub->topic, pub->payload, pub->qos);
          if (pub->qos == 1) session->send(Puback{pub->packet_id});
        } else if (auto* sub = std::get_if<Subscribe>(&*packet)) {
          Suback ack{sub->packet_id, {}};
          std::lock_guard lock(session->subs_mutex);
          for (const auto& [filter, qos] : sub->filters) {
            if (!valid_topic_filter(filter)) {
              ack.return_codes.push_back(0x80);
              continue;
            }
            const std::uint8_t granted = std::min<std::uint8_t>(qos, 1);
            auto& subs = session->subscriptions;
            auto it = std::find_if(subs.begin(), subs.end(), [&](auto& s) { return s.first == filter; });
            if (it != subs.end())
              it->second = granted;
            else
              subs.emplace_back(filter, granted);
            ack.return_codes.push_back(granted);
          }
          session->send(ack);
        } else if (std::holds_alternative<Pingreq>(*packet)) {
          session->send(Pingresp{});
        } else if (std::holds_alternative<Disconnect>(*packet)) {
          closing = true;
          break;
        }
      }
      if (closing) break;
    }
  } catch (const std::exception& e) {
    spdlog::debug("broker: session '{}' ended: {}", session->client_id, e.what());
  }
  session->stream.shutdown();
  std::lock_guard lock(sessions_mutex_);
  sessions_.remove(session);
}

void Broker::route(const std::string& topic, const std::string& payload, std::uint8_t qos) {
  std::vector<std::pair<std::shared_ptr<Session>, std::uint8_t>> targets;
  {
    std::lock_guard lock(sessions_mutex_);
    for (const auto& s : sessions_) {
      std::lock_guard subs_lock(s->subs_mutex);
      std::optional<std::uint8_t> best;
      for (const auto& [filter, granted] : s->subscriptions)
        if (topic_matches(filter, topic)) best = std::max<std::uint8_t>(best.value_or(0), granted);
      if (best) targets.emplace_back(s, std::min(*best, qos));
    }
  }
  for (auto& [s, q] : targets) {
    Publish out{topic, payload, q, false, false, 0};
    if (q > 0) out.packet_id = s->next_id();
    try {
      s->send(out);
      ++routed_;
    } catch (const std::exception& e) {
      spdlog::debug("broker: drop delivery to '{}': {}", s->client_id, e.what());
    }
  }
}

}  // namespace airq::mqtt
