#include <catch2/catch_amalgamated.hpp>

#include <httplib.h>

#include "nuhf/server.hpp"
#include "replay_oracle.hpp"
#include "support.hpp"

using namespace nuhf;

namespace {

struct Served {
  std::shared_ptr<AuditLog> audit = std::make_shared<AuditLog>();
  RuntimeService service;
  ApiServer server;
  int port = 0;

  Served()
      : service(std::make_unique<Session>(testing::shutdown_scenario(), audit)), server(service) {
    port = server.bind("127.0.0.1", 0);
    server.start();
  }
  ~Served() {
    server.stop();
    service.stop();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }
};

nlohmann::json get_json(httplib::Client& c, const std::string& path) {
  auto res = c.Get(path);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  return nlohmann::json::parse(res->body);
}

TelemetryStream shutdown_stream() {
  return load_telemetry(testing::kShutdown / "telemetry_shutdown.csv", *testing::shutdown_scenario());
}

// Approves every token over HTTP until the procedure completes.
void approve_until_done(Served& s) {
  auto c = s.client();
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
  while (std::chrono::steady_clock::now() < deadline) {
    const auto state = get_json(c, "/state");
    if (state.at("mode") == "Completed") return;
    if (!state.at("pending_approvals").empty()) {
      const std::string id = state["pending_approvals"][0]["approval_id"];
      auto res = c.Post("/approvals/" + id, R"({"decision":"approved"})", "application/json");
      REQUIRE(res);
      REQUIRE(res->status == 200);
      continue;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  FAIL("served replay did not complete");
}

}  // namespace

TEST_CASE("Fresh server reports Idle", "[server]") {
  Served s;
  auto c = s.client();
  const auto state = get_json(c, "/state");
  CHECK(state.at("mode") == "Idle");
  CHECK(state.at("pending_approvals").empty());
  CHECK(state.at("halted") == false);
  CHECK(get_json(c, "/audit").empty());
  CHECK(get_json(c, "/procedure").is_object());
}

TEST_CASE("Bad requests map to client errors", "[server]") {
  Served s;
  auto c = s.client();
  auto unknown = c.Post("/approvals/apr-0042", R"({"decision":"approved"})", "application/json");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);
  CHECK(nlohmann::json::parse(unknown->body).at("error") == "unknown-approval");

  auto bad_body = c.Post("/approvals/apr-0001", "not json", "application/json");
  REQUIRE(bad_body);
  CHECK(bad_body->status == 400);

  auto bad_decision = c.Post("/approvals/apr-0001", R"({"decision":"maybe"})", "application/json");
  REQUIRE(bad_decision);
  CHECK(bad_decision->status == 400);

  auto bad_since = c.Get("/audit?since=abc");
  REQUIRE(bad_since);
  CHECK(bad_since->status == 400);
}

TEST_CASE("Taken port is reported", "[server]") {
  Served s;
  RuntimeService other(std::make_unique<Session>(testing::shutdown_scenario(), std::make_shared<AuditLog>()));
  ApiServer second(other);
  CHECK(testing::error_of([&] { second.bind("127.0.0.1", s.port); }) == ErrorCode::Io);
}

TEST_CASE("Served replay with HTTP approvals matches the headless audit", "[server][replay]") {
  Served s;
  TelemetryFeeder feeder(s.service, shutdown_stream(), 0.0);
  feeder.start();
  approve_until_done(s);
  REQUIRE(feeder.wait(std::chrono::seconds(30)));
  CHECK(feeder.error().empty());

  testing::TempDir dir("nuhf-served");
  testing::replay(dir.path(), "approve_all.json");
  const auto headless = detail::read_file(dir / "audit.jsonl");

  std::string served;
  for (const auto& r : s.audit->records()) served += to_json(r).dump() + "\n";
  CHECK(served == headless);

  // The audit endpoint serves the same records.
  auto c = s.client();
  const auto listed = get_json(c, "/audit");
  CHECK(listed.size() == s.audit->records().size());
  CHECK(get_json(c, "/audit?since=3").size() == listed.size() - 3);
  const auto view = get_json(c, "/procedure");
  for (const auto& step : view.at("steps")) CHECK(step.at("lifecycle") == "Executed");
}

TEST_CASE("Double submission reports the consumed token", "[server]") {
  Served s;
  TelemetryFeeder feeder(s.service, shutdown_stream(), 0.0);
  feeder.start();
  REQUIRE(s.service.wait_until([](const Snapshot& snap) { return snap.awaiting_approval; }, std::chrono::seconds(30)));
  auto c = s.client();
  const std::string id = get_json(c, "/state")["pending_approvals"][0]["approval_id"];
  auto first = c.Post("/approvals/" + id, R"({"decision":"rejected"})", "application/json");
  REQUIRE(first);
  CHECK(first->status == 200);
  auto second = c.Post("/approvals/" + id, R"({"decision":"approved"})", "application/json");
  REQUIRE(second);
  CHECK(second->status == 404);
  feeder.stop();
}

TEST_CASE("Event stream emits one message per audit record", "[server]") {
  Served s;
  TelemetryFeeder feeder(s.service, shutdown_stream(), 0.0);
  feeder.start();
  approve_until_done(s);
  REQUIRE(feeder.wait(std::chrono::seconds(30)));
  const auto expected = s.audit->records().size();
  REQUIRE(expected > 0);

  auto c = s.client();
  std::string buffer;
  std::size_t messages = 0;
  std::vector<std::uint64_t> ids;
  c.Get("/events?since=0", [&](const char* data, std::size_t len) {
    buffer.append(data, len);
    for (auto end = buffer.find("\n\n"); end != std::string::npos; end = buffer.find("\n\n")) {
      const std::string msg = buffer.substr(0, end);
      buffer.erase(0, end + 2);
      if (msg.rfind("id: ", 0) == 0) {
        ++messages;
        ids.push_back(std::stoull(msg.substr(4, msg.find('\n') - 4)));
      }
    }
    return messages < expected;
  });
  CHECK(messages == expected);
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == i + 1);
}
