#include "seedsim/ground/sbd_tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <fmt/format.h>

#include "seedsim/protocol/sbd.hpp"

namespace seedsim::ground {

using protocol::ByteView;
using protocol::Bytes;

std::vector<SbdStreamParser::Event> SbdStreamParser::feed(ByteView data) {
  std::vector<Event> events;
  if (closed_) return events;
  buffer_.insert(buffer_.end(), data.begin(), data.end());
  std::size_t pos = 0;
  while (buffer_.size() - pos >= protocol::kSbdTcpHeaderSize) {
    const std::uint16_t magic = static_cast<std::uint16_t>(buffer_[pos] | (buffer_[pos + 1] << 8));
    const std::uint16_t len = static_cast<std::uint16_t>(buffer_[pos + 2] | (buffer_[pos + 3] << 8));
    if (magic != protocol::kSbdTcpMagic || len != protocol::kSbdRecordSize) {
      Event e;
      e.ok = false;
      e.error = magic != protocol::kSbdTcpMagic ? Errc::BadMagic : Errc::WrongLength;
      e.bytes.assign(buffer_.begin() + static_cast<long>(pos), buffer_.end());
      events.push_back(std::move(e));
      closed_ = true;
      buffer_.clear();
      return events;
    }
    if (buffer_.size() - pos < protocol::kSbdTcpHeaderSize + len) break;
    Event e;
    const auto begin = buffer_.begin() + static_cast<long>(pos + protocol::kSbdTcpHeaderSize);
    e.bytes.assign(begin, begin + len);
    events.push_back(std::move(e));
    pos += protocol::kSbdTcpHeaderSize + len;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(pos));
  return events;
}

std::optional<SbdStreamParser::Event> SbdStreamParser::finish() {
  if (closed_) return std::nullopt;
  closed_ = true;
  if (buffer_.empty()) return std::nullopt;
  Event e;
  e.ok = false;
  e.error = Errc::Truncated;
  e.bytes = std::move(buffer_);
  buffer_.clear();
  return e;
}

bool ingest_sbd_stream(Backend& backend, SbdStreamParser& parser, ByteView data) {
  for (auto& e : parser.feed(data)) {
    if (e.ok) {
      backend.ingest_sbd(e.bytes, Channel::Iridium);
    } else {
      backend.quarantine(Channel::Iridium, to_string(e.error), e.bytes);
    }
  }
  return !parser.closed();
}

void finish_sbd_stream(Backend& backend, SbdStreamParser& parser) {
  if (auto e = parser.finish()) backend.quarantine(Channel::Iridium, to_string(e->error), e->bytes);
}

void DirectSbdEndpoint::deliver(ByteView wire) {
  SbdStreamParser parser;
  ingest_sbd_stream(backend_, parser, wire);
  finish_sbd_stream(backend_, parser);
}

SbdTcpServer::SbdTcpServer(Backend& backend, std::uint16_t port, std::string bind_address)
    : backend_(backend), port_(port), bind_address_(std::move(bind_address)) {}

SbdTcpServer::~SbdTcpServer() { stop(); }

void SbdTcpServer::start() {
  if (running_) return;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw Error(Errc::NotFound, fmt::format("socket: {}", std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, bind_address_.c_str(), &addr.sin_addr) != 1) {
    throw Error(Errc::ScenarioError, fmt::format("bad bind address {}", bind_address_));
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(listen_fd_, 16) < 0) {
    const std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(Errc::NotFound, fmt::format("bind/listen on port {}: {}", port_, msg));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void SbdTcpServer::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers = std::move(workers_);
  }
  for (auto& t : workers) t.join();
}

void SbdTcpServer::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 100) <= 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    ++connections_;
    std::lock_guard lock(workers_mu_);
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void SbdTcpServer::serve(int fd) {
  SbdStreamParser parser;
  std::uint8_t buf[4096];
  bool open = true;
  while (open) {
    const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    open = ingest_sbd_stream(backend_, parser, ByteView(buf, static_cast<std::size_t>(n)));
  }
  if (open) finish_sbd_stream(backend_, parser);
  {
    std::lock_guard lock(workers_mu_);
    std::erase(client_fds_, fd);
  }
  ::close(fd);
}

void send_sbd_tcp(const std::string& host, std::uint16_t port, ByteView wire) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw Error(Errc::NotFound, fmt::format("cannot resolve {}", host));
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
  if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) < 0) {
    const std::string msg = std::strerror(errno);
    ::freeaddrinfo(res);
    if (fd >= 0) ::close(fd);
    throw Error(Errc::NotFound, fmt::format("connect {}:{}: {}", host, port, msg));
  }
  ::freeaddrinfo(res);
  std::size_t off = 0;
  while (off < wire.size()) {
    const ssize_t n = ::send(fd, wire.data() + off, wire.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    off += static_cast<std::size_t>(n);
  }
  ::shutdown(fd, SHUT_WR);
  // Wait for the server to close so the caller can observe ingestion afterwards.
  std::uint8_t sink[64];
  while (::recv(fd, sink, sizeof(sink), 0) > 0) {
  }
  ::close(fd);
}

}  // namespace seedsim::ground
