#include "nuhf/service.hpp"

#include "nuhf/error.hpp"

namespace nuhf {

RuntimeService::RuntimeService(std::unique_ptr<Session> session)
    : session_(std::move(session)), audit_(session_ ? session_->audit_log() : nullptr) {
  if (!session_) throw Error(ErrorCode::InvalidArgument, "service needs a session");
  publish();
  worker_ = std::thread([this] { run(); });
}

RuntimeService::~RuntimeService() { stop(); }

std::future<void> RuntimeService::post(std::function<void(Session&)> command) {
  // The snapshot is published before the future resolves, so a caller that
  // waits on the future never observes pre-command state afterwards.
  std::packaged_task<void()> task([this, command = std::move(command)] {
    try {
      command(*session_);
    } catch (...) {
      publish();
      throw;
    }
    publish();
  });
  auto future = task.get_future();
  {
    std::lock_guard lock(queue_mutex_);
    if (stopping_) throw Error(ErrorCode::InvalidState, "service is stopped");
    queue_.push_back(std::move(task));
  }
  queue_cv_.notify_one();
  return future;
}

std::shared_ptr<const Snapshot> RuntimeService::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

bool RuntimeService::wait_until(const std::function<bool(const Snapshot&)>& pred,
                                std::chrono::milliseconds timeout) const {
  std::unique_lock lock(snapshot_mutex_);
  return snapshot_cv_.wait_for(lock, timeout, [&] { return pred(*snapshot_); });
}

void RuntimeService::stop() {
  {
    std::lock_guard lock(queue_mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void RuntimeService::run() {
  for (;;) {
    std::packaged_task<void()> task;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

void RuntimeService::publish() {
  auto next = std::make_shared<Snapshot>();
  const auto& state = session_->runtime().state();
  next->mode = state.mode;
  next->awaiting_approval = session_->awaiting_approval();
  next->halted = session_->halted();
  next->state = to_json(state);
  next->state["halted"] = next->halted;
  next->procedure = procedure_view(state);
  {
    std::lock_guard lock(snapshot_mutex_);
    next->version = snapshot_ ? snapshot_->version + 1 : 1;
    snapshot_ = std::move(next);
  }
  snapshot_cv_.notify_all();
}

TelemetryFeeder::TelemetryFeeder(RuntimeService& service, TelemetryStream stream, double speed)
    : service_(service), stream_(std::move(stream)), speed_(speed) {
  if (speed_ < 0) throw Error(ErrorCode::InvalidArgument, "speed must not be negative");
}

TelemetryFeeder::~TelemetryFeeder() { stop(); }

void TelemetryFeeder::start() {
  service_.post([columns = stream_.columns](Session& s) { s.bind_telemetry(columns); }).get();
  thread_ = std::thread([this] { run(); });
}

void TelemetryFeeder::stop() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

bool TelemetryFeeder::done() const {
  std::lock_guard lock(mutex_);
  return done_;
}

std::string TelemetryFeeder::error() const {
  std::lock_guard lock(mutex_);
  return error_;
}

bool TelemetryFeeder::wait(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] { return done_; });
}

void TelemetryFeeder::run() {
  auto stopped = [&] {
    std::lock_guard lock(mutex_);
    return stop_;
  };
  Tick previous = stream_.frames.empty() ? 0 : stream_.frames.front().time;
  for (const auto& frame : stream_.frames) {
    while (!stopped() && !service_.wait_until([](const Snapshot& s) { return !s.awaiting_approval; },
                                              std::chrono::milliseconds(50))) {
    }
    if (stopped()) break;
    if (speed_ > 0) {
      const double seconds = static_cast<double>(frame.time - previous) * kSecondsPerTick / speed_;
      std::unique_lock lock(mutex_);
      cv_.wait_for(lock, std::chrono::duration<double>(seconds), [&] { return stop_; });
      if (stop_) break;
    }
    previous = frame.time;
    try {
      service_.post([frame](Session& s) { s.feed(frame); }).get();
    } catch (const std::exception& ex) {
      std::lock_guard lock(mutex_);
      error_ = ex.what();
      break;
    }
  }
  if (!stopped() && error().empty()) {
    try {
      service_.post([](Session& s) { s.finish(); }).get();
    } catch (const std::exception& ex) {
      std::lock_guard lock(mutex_);
      error_ = ex.what();
    }
  }
  {
    std::lock_guard lock(mutex_);
    done_ = true;
  }
  cv_.notify_all();
}

}  // namespace nuhf
