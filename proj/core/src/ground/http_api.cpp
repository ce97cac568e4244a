#include "seedsim/ground/http_api.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

#include <fmt/format.h>

#include "seedsim/error.hpp"
#include "seedsim/kernel/node.hpp"

namespace seedsim::ground {

using nlohmann::json;

std::optional<std::uint8_t> parse_target(const json& t) {
  if (t.is_number_unsigned() && t.get<unsigned>() <= 0xFF) return static_cast<std::uint8_t>(t.get<unsigned>());
  if (!t.is_string()) return std::nullopt;
  const auto s = t.get<std::string>();
  if (s == "rbc") return kernel::kAddressRbc;
  if (s == "sbc1" || s == "seed1" || s == "1") return kernel::kAddressSbc1;
  if (s == "sbc2" || s == "seed2" || s == "2") return kernel::kAddressSbc2;
  if (s == "broadcast" || s == "all") return kernel::kAddressBroadcast;
  return std::nullopt;
}

struct HttpApi::Impl {
  Backend& backend;
  std::string bind;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> running{false};

  Impl(Backend& b, std::string addr) : backend(b), bind(std::move(addr)) { routes(); }

  static void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void routes() {
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) { send_json(res, backend.health()); });

    server.Get("/records", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t since = 0;
      std::size_t limit = 1000;
      try {
        if (req.has_param("since")) since = std::stoull(req.get_param_value("since"));
        if (req.has_param("limit")) limit = std::stoul(req.get_param_value("limit"));
      } catch (const std::exception&) {
        return send_json(res, {{"error", "since/limit must be integers"}}, 400);
      }
      json arr = json::array();
      std::uint64_t last = since;
      for (const auto& r : backend.records(since, limit)) {
        arr.push_back(r.to_json());
        last = r.seq;
      }
      send_json(res, {{"records", arr}, {"next", last}});
    });

    server.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
      auto sub = backend.stream().subscribe();
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, sub, first = true](std::size_t, httplib::DataSink& sink) mutable {
            if (first) {
              first = false;
              const std::string hello = ": subscribed\n\n";
              return sink.write(hello.data(), hello.size());
            }
            if (!running || sub->closed()) {
              sink.done();
              return true;
            }
            if (auto r = sub->pop(std::chrono::milliseconds(250))) {
              const std::string ev = fmt::format("id: {}\ndata: {}\n\n", r->seq, r->to_json().dump());
              return sink.write(ev.data(), ev.size());
            }
            const std::string keepalive = ": keepalive\n\n";
            return sink.write(keepalive.data(), keepalive.size());
          },
          [this, sub](bool) { backend.stream().unsubscribe(sub); });
    });

    server.Get(R"(/prediction/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto target = parse_target(json(req.matches[1].str()));
      if (!target || (*target != kernel::kAddressSbc1 && *target != kernel::kAddressSbc2)) {
        return send_json(res, {{"error", "unknown seed"}}, 404);
      }
      const std::uint8_t seed = *target == kernel::kAddressSbc1 ? 1 : 2;
      if (auto p = backend.prediction(seed)) {
        json j = p->to_json();
        j["seed"] = seed;
        return send_json(res, j);
      }
      send_json(res, {{"error", "no prediction"}, {"seed", seed}}, 404);
    });

    server.Post("/command", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const std::exception&) {
        return send_json(res, {{"error", "body must be JSON"}}, 400);
      }
      const auto cmd = command_from_string(body.value("command", std::string{}));
      if (!cmd) return send_json(res, {{"error", "unknown command"}}, 400);
      const auto target = parse_target(body.value("target", json("broadcast")));
      if (!target) return send_json(res, {{"error", "unknown target"}}, 400);
      try {
        const auto c = backend.dispatch_command(*cmd, *target, body.value("issued_by", std::string("operator")));
        send_json(res, c.to_json(), 202);
      } catch (const Error& e) {
        const int status = e.code() == Errc::PhaseError ? 409 : 400;
        send_json(res, {{"error", to_string(e.code())}, {"detail", e.what()}}, status);
      }
    });

    server.Get("/commands", [this](const httplib::Request&, httplib::Response& res) {
      backend.poll_timeouts();
      json arr = json::array();
      for (const auto& c : backend.commands()) arr.push_back(c.to_json());
      send_json(res, arr);
    });

    server.Get(R"(/commands/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
      backend.poll_timeouts();
      const auto id = static_cast<std::uint16_t>(std::stoul(req.matches[1].str()));
      if (auto c = backend.command(id)) return send_json(res, c->to_json());
      send_json(res, {{"error", "no such command"}}, 404);
    });
  }
};

HttpApi::HttpApi(Backend& backend, std::string bind_address)
    : impl_(std::make_unique<Impl>(backend, std::move(bind_address))) {}

HttpApi::~HttpApi() { stop(); }

void HttpApi::start(std::uint16_t port) {
  if (impl_->running) return;
  int bound = port == 0 ? impl_->server.bind_to_any_port(impl_->bind) : (impl_->server.bind_to_port(impl_->bind, port) ? port : -1);
  if (bound <= 0) throw Error(Errc::NotFound, fmt::format("cannot bind HTTP port {}", port));
  port_ = static_cast<std::uint16_t>(bound);
  impl_->running = true;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpApi::stop() {
  if (!impl_ || !impl_->running.exchange(false)) return;
  impl_->backend.stream().close_all();
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace seedsim::ground
