#include "nuhf/server.hpp"

#include <charconv>

#include <httplib.h>

#include "nuhf/error.hpp"

namespace nuhf {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownApproval: return 404;
    case ErrorCode::ExpiredApproval: return 410;
    case ErrorCode::InvalidState:
    case ErrorCode::LifecycleViolation:
    case ErrorCode::StepNotExecuted: return 409;
    default: return 500;
  }
}

std::uint64_t since_param(const httplib::Request& req) {
  if (!req.has_param("since")) return 0;
  const auto text = req.get_param_value("since");
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::Parse, "since must be a non-negative integer");
  return v;
}

}  // namespace

ApiServer::ApiServer(RuntimeService& service) : service_(service), http_(std::make_unique<httplib::Server>()) {
  // The library default adds SO_REUSEPORT, which lets a second server share a taken port.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::routes() {
  http_->Get("/state", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, service_.snapshot()->state);
  });

  http_->Get("/procedure", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, service_.snapshot()->procedure);
  });

  http_->Get("/audit", [this](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t since = 0;
    try {
      since = since_param(req);
    } catch (const Error& ex) {
      return send_error(res, 400, to_string(ex.code()), ex.detail());
    }
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : service_.audit()->since(since)) out.push_back(to_json(r));
    send_json(res, 200, out);
  });

  http_->Post("/approvals/:id", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    ApprovalDecision decision{};
    try {
      const auto body = nlohmann::json::parse(req.body);
      decision = parse_approval_decision(body.at("decision").get<std::string>());
    } catch (const nlohmann::json::exception& ex) {
      return send_error(res, 400, "parse-error", std::string("body must be {\"decision\": ...}: ") + ex.what());
    } catch (const Error& ex) {
      return send_error(res, 400, to_string(ex.code()), ex.detail());
    }
    try {
      service_.post([id, decision](Session& s) { s.submit(id, decision); }).get();
    } catch (const Error& ex) {
      return send_error(res, status_for(ex.code()), to_string(ex.code()), ex.detail());
    }
    send_json(res, 200, {{"approval_id", id}, {"decision", to_string(decision)}, {"state", service_.snapshot()->state}});
  });

  http_->Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t since = 0;
    try {
      since = since_param(req);
    } catch (const Error& ex) {
      return send_error(res, 400, to_string(ex.code()), ex.detail());
    }
    auto cursor = std::make_shared<std::uint64_t>(since);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) {
      if (stopping_) return false;
      auto& audit = *service_.audit();
      if (!audit.wait_newer(*cursor, std::chrono::milliseconds(200))) {
        if (!sink.is_writable()) return false;
        static constexpr char kKeepAlive[] = ": keep-alive\n\n";
        return sink.write(kKeepAlive, sizeof kKeepAlive - 1);
      }
      for (const auto& r : audit.since(*cursor)) {
        const std::string msg = "id: " + std::to_string(r.seq) + "\nevent: audit\ndata: " + to_json(r).dump() + "\n\n";
        if (!sink.write(msg.data(), msg.size())) return false;
        *cursor = r.seq;
      }
      return true;
    });
  });
}

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = http_->bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!http_->bind_to_port(host, port)) throw Error(ErrorCode::Io, "port " + std::to_string(port) + " is in use");
  return port;
}

void ApiServer::listen() { http_->listen_after_bind(); }

void ApiServer::start() {
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void ApiServer::stop() {
  stopping_ = true;
  http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace nuhf
