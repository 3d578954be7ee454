#include "airq/ingest/subscriber.hpp"

#include <condition_variable>

#include <spdlog/spdlog.h>

namespace airq::ingest {

MqttSubscriber::MqttSubscriber(Ingestor& ingestor, SubscriberOptions options)
    : ingestor_(ingestor), options_(std::move(options)) {}

MqttSubscriber::~MqttSubscriber() { stop(); }

void MqttSubscriber::start() {
  if (worker_.joinable()) return;
  worker_ = std::jthread([this](std::stop_token st) { run(st); });
}

void MqttSubscriber::stop() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
  std::lock_guard lock(mutex_);
  client_.reset();
  subscribed_ = false;
}

bool MqttSubscriber::connected() const { return subscribed_.load(); }

bool MqttSubscriber::wait_connected(std::chrono::milliseconds timeout) const {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!subscribed_) {
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return true;
}

void MqttSubscriber::run(std::stop_token stop) {
  auto backoff = options_.reconnect_initial;
  std::mutex wait_mutex;
  std::condition_variable_any wait_cv;
  auto sleep_for = [&](std::chrono::milliseconds d) {
    std::unique_lock lock(wait_mutex);
    wait_cv.wait_for(lock, stop, d, [] { return false; });
  };

  while (!stop.stop_requested()) {
    try {
      auto client = std::make_unique<mqtt::Client>(options_.broker, options_.client);
      client->subscribe(options_.topic_filter, 1, [this](const std::string& topic, const std::string& payload) {
        ingestor_.handle_message(topic, payload);
      });
      spdlog::info("mqtt: subscribed to '{}' on {}", options_.topic_filter, options_.broker.to_string());
      {
        std::lock_guard lock(mutex_);
        client_ = std::move(client);
      }
      subscribed_ = true;
      backoff = options_.reconnect_initial;
      while (!stop.stop_requested()) {
        {
          std::lock_guard lock(mutex_);
          if (!client_ || !client_->connected()) break;
        }
        sleep_for(std::chrono::milliseconds(100));
      }
    } catch (const std::exception& e) {
      spdlog::warn("mqtt: {} (retrying in {} ms)", e.what(), backoff.count());
    }
    subscribed_ = false;
    {
      std::lock_guard lock(mutex_);
      client_.reset();
    }
    if (stop.stop_requested()) break;
    sleep_for(backoff);
    backoff = std::min(options_.reconnect_max, backoff * 2);
  }
}

}  // namespace airq::ingest
