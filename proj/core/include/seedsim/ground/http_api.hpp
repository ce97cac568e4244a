#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "seedsim/ground/backend.hpp"

namespace seedsim::ground {

/// Resolves "rbc", "sbc1", "seed2", "broadcast", or a numeric address.
std::optional<std::uint8_t> parse_target(const nlohmann::json& target);

/// JSON-over-HTTP query, stream (server-sent events), and command API.
///   GET  /records?since=N&limit=M
///   GET  /stream
///   GET  /prediction/{seed}
///   POST /command        {"command": "...", "target": "...", "issued_by": "..."}
///   GET  /commands, /commands/{id}
///   GET  /health
class HttpApi {
 public:
  explicit HttpApi(Backend& backend, std::string bind_address = "127.0.0.1");
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds (port 0: ephemeral) and serves on a background thread.
  void start(std::uint16_t port = 0);
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

}  // namespace seedsim::ground
