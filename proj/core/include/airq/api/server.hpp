#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "airq/ingest/ingestor.hpp"
#include "airq/salubrity.hpp"

namespace airq::api {

struct ApiOptions {
  salubrity::SalubrityConfig salubrity;
  std::optional<std::filesystem::path> static_dir;  // mounted at /
  std::size_t max_surface_steps = 400;
};

// REST surface over a store and its ingestor. Routes are listed in
// docs/api.md. Error bodies are {"code", "message", "field"?}.
class ApiServer {
 public:
  explicit ApiServer(ingest::Ingestor& ingestor, ApiOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Error{kNetwork}.
  std::uint16_t bind(const std::string& host, std::uint16_t port);
  std::uint16_t port() const;

  // Serve on the calling thread until stop().
  void run();
  // Serve on a background thread; returns once the listener is accepting.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status used for an error code.
int http_status(ErrorCode code);

}  // namespace airq::api
