#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "airq/mqtt/codec.hpp"
#include "airq/mqtt/socket.hpp"

namespace airq::mqtt {

struct BrokerUri {
  std::string host;
  std::uint16_t port = 1883;

  // Accepts mqtt://host[:port], tcp://host[:port] or host[:port].
  // Throws Error{kInvalidParameter} with a description of what is wrong.
  static BrokerUri parse(const std::string& uri);
  std::string to_string() const;
};

struct ClientOptions {
  std::string client_id = "airq";
  std::optional<std::string> username;
  std::optional<std::string> password;
  std::chrono::seconds keep_alive{30};
  std::chrono::milliseconds connect_timeout{3000};
  std::chrono::milliseconds ack_timeout{5000};
};

// Blocking MQTT 3.1.1 client with a background reader thread. publish() and
// subscribe() wait for their acknowledgements. Incoming QoS 1 messages are
// acknowledged after the handler returns.
class Client {
 public:
  using MessageHandler = std::function<void(const std::string& topic, const std::string& payload)>;
  using DisconnectHandler = std::function<void(const std::string& reason)>;

  // Throws Error{kNetwork} if the broker is unreachable or refuses the session.
  Client(const BrokerUri& uri, ClientOptions options);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void publish(const std::string& topic, const std::string& payload, std::uint8_t qos = 1);
  void subscribe(const std::string& filter, std::uint8_t qos, MessageHandler handler);
  void on_disconnect(DisconnectHandler handler);
  void disconnect();
  bool connected() const { return connected_.load(); }

 private:
  struct Pending {
    bool done = false;
    std::vector<std::uint8_t> codes;
  };

  void send(const Packet& packet);
  std::uint16_t next_packet_id();
  Pending await(std::uint16_t id);
  void reader_loop(std::stop_token stop);
  void connection_lost(const std::string& reason);

  ClientOptions options_;
  TcpStream stream_;
  std::mutex write_mutex_;
  std::atomic<bool> connected_{false};
  std::atomic<std::uint16_t> packet_id_{0};

  std::mutex state_mutex_;
  std::condition_variable state_cv_;
  std::map<std::uint16_t, Pending> pending_;
  std::vector<std::pair<std::string, MessageHandler>> handlers_;
  DisconnectHandler disconnect_handler_;

  Decoder decoder_;
  std::atomic<std::chrono::steady_clock::rep> last_send_{0};
  std::jthread reader_;
};

}  // namespace airq::mqtt
