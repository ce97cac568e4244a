#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "seedsim/error.hpp"
#include "seedsim/ground/backend.hpp"
#include "seedsim/transport/iridium.hpp"

namespace seedsim::ground {

/// Incremental parser for the SBD TCP stream (magic u16, length u16, payload).
class SbdStreamParser {
 public:
  struct Event {
    bool ok = true;
    Errc error = Errc::Truncated;
    protocol::Bytes bytes;  // payload, or the offending bytes on error
  };

  /// After a BadMagic or WrongLength event the parser is closed and ignores further input.
  std::vector<Event> feed(protocol::ByteView data);
  /// End of stream; a partial message yields a Truncated event.
  std::optional<Event> finish();
  bool closed() const { return closed_; }

 private:
  protocol::Bytes buffer_;
  bool closed_ = false;
};

/// Runs one connection's bytes through the parser into the backend. Returns false when the
/// connection must be closed.
bool ingest_sbd_stream(Backend& backend, SbdStreamParser& parser, protocol::ByteView data);
void finish_sbd_stream(Backend& backend, SbdStreamParser& parser);

/// Simulation endpoint: delivers gateway bytes straight into a backend, one connection per message.
class DirectSbdEndpoint final : public transport::SbdEndpoint {
 public:
  explicit DirectSbdEndpoint(Backend& backend) : backend_(backend) {}
  void deliver(protocol::ByteView wire) override;

 private:
  Backend& backend_;
};

class SbdTcpServer {
 public:
  /// port 0 picks an ephemeral port.
  SbdTcpServer(Backend& backend, std::uint16_t port = 0, std::string bind_address = "127.0.0.1");
  ~SbdTcpServer();
  SbdTcpServer(const SbdTcpServer&) = delete;
  SbdTcpServer& operator=(const SbdTcpServer&) = delete;

  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  std::uint64_t connections() const { return connections_; }

 private:
  void accept_loop();
  void serve(int fd);

  Backend& backend_;
  std::uint16_t port_;
  std::string bind_address_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> connections_{0};
  std::thread acceptor_;
  std::mutex workers_mu_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

/// Opens one connection, writes the bytes, and closes.
void send_sbd_tcp(const std::string& host, std::uint16_t port, protocol::ByteView wire);

/// Gateway endpoint that forwards over TCP.
class TcpSbdEndpoint final : public transport::SbdEndpoint {
 public:
  TcpSbdEndpoint(std::string host, std::uint16_t port) : host_(std::move(host)), port_(port) {}
  void deliver(protocol::ByteView wire) override { send_sbd_tcp(host_, port_, wire); }

 private:
  std::string host_;
  std::uint16_t port_;
};

}  // namespace seedsim::ground
