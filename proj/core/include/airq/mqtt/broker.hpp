#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "airq/mqtt/socket.hpp"

namespace airq::mqtt {

// Minimal in-process MQTT 3.1.1 broker for local runs and integration tests.
// Routes QoS 0/1 publishes to matching subscriptions (granted QoS is capped at
// 1). No persistence, retained messages or will messages.
class Broker {
 public:
  explicit Broker(std::string host = "127.0.0.1", std::uint16_t port = 0);
  ~Broker();
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  std::string uri() const;
  void stop();

  std::size_t messages_routed() const { return routed_.load(); }
  std::size_t connected_clients() const;

 private:
  struct Session;

  void accept_loop(std::stop_token stop);
  void serve(std::shared_ptr<Session> session, std::stop_token stop);
  void route(const std::string& topic, const std::string& payload, std::uint8_t qos);

  std::string host_;
  TcpListener listener_;
  mutable std::mutex sessions_mutex_;
  std::list<std::shared_ptr<Session>> sessions_;
  std::atomic<std::size_t> routed_{0};
  std::list<std::jthread> workers_;
  std::jthread acceptor_;
};

}  // namespace airq::mqtt
