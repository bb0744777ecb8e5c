#include <catch2/catch_amalgamated.hpp>

#include "nuhf/session.hpp"
#include "replay_oracle.hpp"
#include "support.hpp"

using namespace nuhf;
using Catch::Approx;
using testing::error_of;

TEST_CASE("Approval script parsing", "[session]") {
  const auto s = parse_approval_script(
      R"([{"ordinal":1,"decision":"approved"},{"ordinal":3,"decision":"rejected","delay_ticks":40},{"ordinal":"*","decision":"approved"}])");
  CHECK(s.lookup(1)->decision == ApprovalDecision::Approved);
  CHECK(s.lookup(3)->decision == ApprovalDecision::Rejected);
  CHECK(s.lookup(3)->delay_ticks == 40);
  CHECK(s.lookup(2)->decision == ApprovalDecision::Approved);

  CHECK_FALSE(parse_approval_script("[]").lookup(1).has_value());
  CHECK(error_of([] { parse_approval_script(R"([{"ordinal":1,"decision":"approved"},{"ordinal":1,"decision":"rejected"}])"); }) ==
        ErrorCode::Parse);
  CHECK(error_of([] { parse_approval_script(R"([{"ordinal":0,"decision":"approved"}])"); }) == ErrorCode::Parse);
  CHECK(error_of([] { parse_approval_script(R"([{"ordinal":1,"decision":"approved","delay_ticks":-1}])"); }) ==
        ErrorCode::Parse);
  CHECK_THROWS_AS(parse_approval_script(R"([{"ordinal":1,"decision":"maybe"}])"), Error);
  CHECK(error_of([] { parse_approval_script("{"); }) == ErrorCode::Parse);
}

TEST_CASE("Approve-all replay completes every step", "[session][replay]") {
  testing::TempDir dir("nuhf-approve");
  const auto report = testing::replay(dir.path(), "approve_all.json");
  REQUIRE(report.event.has_value());
  CHECK(report.event->name == "Disconnection of Generator to 6kV 1B Bus bar");
  CHECK(report.procedure_title == "Reactor Shutdown");
  CHECK(report.final_mode == "Completed");
  CHECK(report.halt_reason.empty());
  CHECK(report.executed_steps == report.step_count);
  CHECK(report.step_count == 11);

  const auto records = testing::read_audit(dir.path());
  const auto* done = testing::last_of(records, "procedure_completed");
  REQUIRE(done != nullptr);
  CHECK(done->detail.at("systemic_hep").get<double>() == Approx(testing::systemic_from_audit(records)).margin(1e-12));
  CHECK(report.systemic_hep == Approx(testing::systemic_from_audit(records)).margin(1e-12));

  const auto authority = testing::check_authority(records);
  INFO(Catch::Detail::stringify(authority.problems));
  CHECK(authority.unauthorised == 0);
  CHECK(authority.gated_executions + authority.allowed_executions == 11);
  CHECK(authority.gated_executions > 0);

  CHECK(std::filesystem::exists(dir / "report.json"));
  const auto json = nlohmann::json::parse(detail::read_file(dir / "report.json"));
  CHECK(json.at("detected_event").at("name") == "Disconnection of Generator to 6kV 1B Bus bar");
}

TEST_CASE("Reject-all replay executes no gated step", "[session][replay]") {
  testing::TempDir dir("nuhf-reject");
  const auto report = testing::replay(dir.path(), "reject_all.json");
  CHECK(report.final_mode == "EventActive");
  CHECK_FALSE(report.halt_reason.empty());

  const auto records = testing::read_audit(dir.path());
  const auto authority = testing::check_authority(records);
  CHECK(authority.gated_executions == 0);
  CHECK(authority.unauthorised == 0);
  CHECK(report.executed_steps == authority.allowed_executions);

  // The rejected step is still only intended.
  const auto* rejection = testing::last_of(records, "approval");
  REQUIRE(rejection != nullptr);
  CHECK(rejection->operator_action == OperatorAction::Rejected);
  CHECK(report.rows.back().outcome == "rejected");
}

TEST_CASE("Without an approvals script the run halts at the first gated step", "[session][replay]") {
  testing::TempDir dir("nuhf-noscript");
  const auto report = testing::replay(dir.path(), "");
  CHECK_FALSE(report.halt_reason.empty());
  CHECK(report.rows.back().outcome == "pending");
  CHECK(testing::check_authority(testing::read_audit(dir.path())).gated_executions == 0);
}

TEST_CASE("A late decision expires and the step is evaluated again", "[session][replay]") {
  testing::TempDir dir("nuhf-late");
  const auto report = testing::replay(dir.path(), "approve_late.json");
  CHECK(report.final_mode == "Completed");
  const auto records = testing::read_audit(dir.path());
  const auto* expired = testing::last_of(records, "approval_expired");
  REQUIRE(expired != nullptr);
  CHECK(expired->detail.at("approval_id") == "apr-0001");
  CHECK(expired->step_id == report.rows.front().step_id);
  CHECK(report.rows.front().outcome == "expired");
  CHECK(report.rows[1].step_id == report.rows.front().step_id);
  CHECK(testing::check_authority(records).unauthorised == 0);
}

TEST_CASE("Identical replays write byte-identical audit logs", "[session][replay]") {
  testing::TempDir a("nuhf-det-a"), b("nuhf-det-b");
  testing::replay(a.path(), "approve_all.json");
  testing::replay(b.path(), "approve_all.json");
  const auto left = detail::read_file(a / "audit.jsonl");
  CHECK_FALSE(left.empty());
  CHECK(left == detail::read_file(b / "audit.jsonl"));
  CHECK(detail::read_file(a / "report.json").size() > 0);
}

TEST_CASE("Missing telemetry names the path", "[session][replay]") {
  testing::TempDir dir("nuhf-missing");
  ReplayOptions options;
  options.telemetry = dir / "nope.csv";
  options.scenario = testing::kShutdown / "scenario.json";
  options.config_dir = testing::kShutdown;
  options.out_dir = dir.path();
  try {
    run_replay(options);
    FAIL("expected an error");
  } catch (const Error& ex) {
    CHECK(ex.code() == ErrorCode::Io);
    CHECK(std::string(ex.what()).find("nope.csv") != std::string::npos);
  }
}

TEST_CASE("External submissions drive a session", "[session]") {
  const auto sc = testing::shutdown_scenario();
  const auto stream = load_telemetry(testing::kShutdown / "telemetry_shutdown.csv", *sc);
  auto audit = std::make_shared<AuditLog>();
  Session session(sc, audit);
  session.bind_telemetry(stream.columns);
  std::size_t decisions = 0;
  for (const auto& f : stream.frames) {
    session.feed(f);
    while (session.awaiting_approval()) {
      const auto id = session.runtime().state().pending_approvals.begin()->first;
      session.submit(id, ApprovalDecision::Approved);
      ++decisions;
    }
  }
  session.finish();
  CHECK(session.runtime().state().mode == Mode::Completed);
  CHECK(decisions > 0);
  CHECK_FALSE(session.awaiting_approval());
  CHECK(error_of([&] { session.submit("apr-9999", ApprovalDecision::Approved); }) == ErrorCode::UnknownApproval);
}
