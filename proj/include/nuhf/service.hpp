#pragma once

// Serialised access to a Session for concurrent callers.
//
// One worker thread applies commands in submission order; readers get the
// snapshot published after the last command and never touch the Session.
// TelemetryFeeder replays a stream into the queue at a chosen speed and holds
// while a gated step waits for a human decision, so tick stamps in the audit
// log do not depend on how quickly the operator answers.

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>

#include "nuhf/session.hpp"

namespace nuhf {

struct Snapshot {
  std::uint64_t version = 0;
  Mode mode = Mode::Idle;
  bool awaiting_approval = false;
  bool halted = false;
  nlohmann::ordered_json state;
  nlohmann::ordered_json procedure;
};

class RuntimeService {
 public:
  explicit RuntimeService(std::unique_ptr<Session> session);
  ~RuntimeService();

  RuntimeService(const RuntimeService&) = delete;
  RuntimeService& operator=(const RuntimeService&) = delete;

  /// Queues `command`; the future carries its completion or exception.
  std::future<void> post(std::function<void(Session&)> command);

  std::shared_ptr<const Snapshot> snapshot() const;
  const std::shared_ptr<AuditLog>& audit() const { return audit_; }

  /// Blocks until `pred(snapshot)` holds or `timeout` passes.
  bool wait_until(const std::function<bool(const Snapshot&)>& pred, std::chrono::milliseconds timeout) const;

  void stop();

 private:
  void run();
  void publish();

  std::unique_ptr<Session> session_;
  std::shared_ptr<AuditLog> audit_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<std::packaged_task<void()>> queue_;
  bool stopping_ = false;

  mutable std::mutex snapshot_mutex_;
  mutable std::condition_variable snapshot_cv_;
  std::shared_ptr<const Snapshot> snapshot_;

  std::thread worker_;
};

class TelemetryFeeder {
 public:
  /// `speed` scales replay time: 1 is real time, 0 feeds as fast as the
  /// queue accepts.
  TelemetryFeeder(RuntimeService& service, TelemetryStream stream, double speed);
  ~TelemetryFeeder();

  void start();
  void stop();
  bool done() const;
  /// The exception text that stopped the replay, empty if none did.
  std::string error() const;
  /// Waits for the feeder to finish; false on timeout.
  bool wait(std::chrono::milliseconds timeout) const;

 private:
  void run();

  RuntimeService& service_;
  TelemetryStream stream_;
  double speed_;
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  bool stop_ = false;
  bool done_ = false;
  std::string error_;
  std::thread thread_;
};

}  // namespace nuhf
