#pragma once

// HTTP+JSON view of a RuntimeService.
//
//   GET  /state                   RuntimeState snapshot
//   GET  /audit?since=N           audit records with seq > N, as a JSON list
//   GET  /procedure               steps, lifecycle, latest assessment, compiled path
//   POST /approvals/{id}          {"decision": "approved" | "rejected"}
//   GET  /events?since=N          server-sent events, one `audit` message per record
//
// Errors are {"error": <code>, "message": <text>} with 400 for a bad body,
// 404 for an unknown approval, 410 for an expired one, 409 for a command the
// current state does not admit.

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "nuhf/service.hpp"

namespace httplib {
class Server;
}

namespace nuhf {

class ApiServer {
 public:
  explicit ApiServer(RuntimeService& service);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port and
  /// throws Io when the port is taken.
  int bind(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  void routes();

  RuntimeService& service_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
};

}  // namespace nuhf
