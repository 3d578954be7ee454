#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace airq::mqtt {

// Connected TCP stream (move-only, closes on destruction).
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream() { close(); }
  TcpStream(TcpStream&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  TcpStream& operator=(TcpStream&& o) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  // Throws Error{kNetwork}.
  static TcpStream connect(const std::string& host, std::uint16_t port,
                           std::chrono::milliseconds timeout);

  void send_all(std::string_view bytes);
  // Returns received bytes, an empty optional on timeout, or throws
  // Error{kNetwork} when the peer closed the connection.
  std::optional<std::string> receive(std::chrono::milliseconds timeout);
  void shutdown();
  void close();
  bool is_open() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  // Port 0 binds an ephemeral port; see port().
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Empty on timeout.
  std::optional<TcpStream> accept(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace airq::mqtt
