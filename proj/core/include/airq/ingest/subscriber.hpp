#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "airq/ingest/ingestor.hpp"
#include "airq/mqtt/client.hpp"

namespace airq::ingest {

struct SubscriberOptions {
  mqtt::BrokerUri broker;
  mqtt::ClientOptions client;
  std::string topic_filter = "workshop/+/reading";
  std::chrono::milliseconds reconnect_initial{500};
  std::chrono::milliseconds reconnect_max{10'000};
};

// Keeps an MQTT subscription alive (reconnecting with backoff) and feeds every
// message into the ingestor.
class MqttSubscriber {
 public:
  MqttSubscriber(Ingestor& ingestor, SubscriberOptions options);
  ~MqttSubscriber();

  void start();
  void stop();
  bool connected() const;
  // Blocks until subscribed or the timeout expires.
  bool wait_connected(std::chrono::milliseconds timeout) const;

 private:
  void run(std::stop_token stop);

  Ingestor& ingestor_;
  SubscriberOptions options_;
  mutable std::mutex mutex_;
  std::unique_ptr<mqtt::Client> client_;
  std::atomic<bool> subscribed_{false};
  std::jthread worker_;
};

}  // namespace airq::ingest
