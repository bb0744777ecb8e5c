#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "nuhf/runtime.hpp"
#include "nuhf/session.hpp"
#include "support.hpp"

using namespace nuhf;
using Catch::Approx;
using testing::error_of;

namespace {

// Labels any window whose single feature (mean z of "A") exceeds 10.
class ThresholdDetector final : public EventDetector {
 public:
  explicit ThresholdDetector(std::string event_id) : event_id_(std::move(event_id)) {}
  std::optional<EventLabel> detect(std::span<const double> features) const override {
    if (features[0] <= 10.0) return std::nullopt;
    return EventLabel{event_id_, "Test event " + event_id_, features[0], 0};
  }

 private:
  std::string event_id_;
};

class SlowAssessor final : public PifAssessor {
 public:
  PIFState assess(const AssessmentContext& c) const override {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    return assess_pifs(c);
  }
};

// A scenario over the fixture graph plus one extra element placed at the
// pointer home, so a one-target step costs no pointing distance.
std::shared_ptr<Scenario> make_scenario(const std::string& procedure_text) {
  const auto& base = *testing::shutdown_scenario();
  auto sc = std::make_shared<Scenario>();
  sc->id = "unit";
  sc->graph = base.graph;
  sc->graph.add_element({"home_button", "Home Button", ElementKind::Button, ScreenPoint{960, 540}, 0, std::nullopt});
  sc->procedures["EV-X"] = parse_procedure(procedure_text);
  sc->gate = base.gate;
  sc->calibration.window_len = 2;
  sc->calibration.parameters = {{"A", 0.0, 1.0, 0.0, 1.0}};
  sc->default_t_avail_s = 600.0;
  return sc;
}

struct Rig {
  std::shared_ptr<AuditLog> audit = std::make_shared<AuditLog>();
  Runtime runtime;
  Tick t = 0;

  explicit Rig(std::shared_ptr<const Scenario> sc, std::string event = "EV-X",
               std::shared_ptr<const PifAssessor> assessor = nullptr)
      : runtime(std::move(sc), audit, std::move(assessor), std::make_shared<ThresholdDetector>(std::move(event))) {}

  void frame(double a) {
    t += 20;
    const TelemetryFrame f{t, {a}};
    runtime.tick({&f, 1});
  }
  void activate() {
    frame(50.0);
    frame(50.0);
  }
  std::size_t count(std::string_view kind) const {
    std::size_t n = 0;
    for (const auto& r : audit->records()) n += r.kind == kind ? 1 : 0;
    return n;
  }
};

const std::string kOneStep = "title: Unit\n[STEP S1 screen_navigation] press\ntarget: home_button\n";
const std::string kTwoSteps = kOneStep + "[STEP S2 screen_navigation] press again\ntarget: home_button\n";
const std::string kSn1 =
    "title: Unit\n[STEP SN1 screen_navigation] valves\ntarget: screen_lookup\ntarget: LBH0AA101\ntarget: LBH0AA201\n"
    "target: LBH0AA102\ntarget: LBH20AA101\ntarget: LBH0AA103\ntarget: LBH20AA101_2\ntarget: LBH30AA201\n"
    "target: LBH50AA101\n";

std::string approval_id_of(const Runtime& rt) {
  REQUIRE(rt.state().pending_approvals.size() == 1);
  return rt.state().pending_approvals.begin()->first;
}

}  // namespace

TEST_CASE("Nominal frames keep the runtime idle and silent", "[runtime]") {
  Rig rig(make_scenario(kOneStep));
  for (int i = 0; i < 10; ++i) rig.frame(0.5);
  CHECK(rig.runtime.state().mode == Mode::Idle);
  CHECK(rig.audit->records().empty());
}

TEST_CASE("Generator disconnection loads the shutdown procedure", "[runtime]") {
  const auto sc = testing::shutdown_scenario();
  const auto stream = load_telemetry(testing::kShutdown / "telemetry_shutdown.csv", *sc);
  auto audit = std::make_shared<AuditLog>();
  Runtime rt(sc, audit);
  rt.bind_telemetry(stream.columns);
  for (const auto& f : stream.frames) {
    rt.tick({&f, 1});
    if (rt.state().mode != Mode::Idle) break;
  }
  REQUIRE(rt.state().mode == Mode::EventActive);
  CHECK(rt.state().active_event->name == "Disconnection of Generator to 6kV 1B Bus bar");
  CHECK(rt.state().active_procedure->procedure.title == "Reactor Shutdown");
  const auto records = audit->records();
  REQUIRE(records.size() == 1);
  CHECK(records[0].kind == "event_detected");
  CHECK(records[0].detail.at("event_id") == "EV-GEN-DISC");
  // Every step path is compiled up front.
  CHECK(rt.state().active_procedure->paths.at("SN1").nodes.size() == 12);
}

TEST_CASE("Unmapped detection is audited once", "[runtime]") {
  Rig rig(make_scenario(kOneStep), "EV-UNMAPPED");
  for (int i = 0; i < 6; ++i) rig.frame(50.0);
  CHECK(rig.runtime.state().mode == Mode::Idle);
  REQUIRE(rig.audit->records().size() == 1);
  CHECK(rig.audit->records()[0].kind == "unknown_event");
  CHECK(rig.audit->records()[0].detail.at("event_id") == "EV-UNMAPPED");
}

TEST_CASE("Ticks must move forward", "[runtime]") {
  Rig rig(make_scenario(kOneStep));
  rig.frame(0.0);
  const TelemetryFrame back{rig.t, {0.0}};
  CHECK(error_of([&] { rig.runtime.tick({&back, 1}); }) == ErrorCode::NonMonotonicTime);
  CHECK(error_of([&] { rig.runtime.advance_clock(-1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Evaluation requires an active procedure", "[runtime]") {
  Rig rig(make_scenario(kOneStep));
  CHECK(error_of([&] { rig.runtime.evaluate_current_step(); }) == ErrorCode::InvalidState);
  CHECK(error_of([&] { rig.runtime.advance(); }) == ErrorCode::InvalidState);
}

TEST_CASE("Low-risk one-node step is allowed and executed", "[runtime]") {
  Rig rig(make_scenario(kOneStep));
  rig.activate();
  const auto a = rig.runtime.evaluate_current_step();
  // mental_prep + visual_search + point(0 px) + click
  CHECK(a.median_s == Approx(1.35 + 1.10 + 0.1 + 0.20).margin(1e-12));
  CHECK(a.p_t < 1e-12);
  CHECK(a.p_c == Approx(1.0 - 0.999 * 0.999).margin(1e-15));
  const auto& risk = rig.runtime.scenario().gate.network.node(bn::kActionRisk);
  CHECK(a.action_risk == Approx(risk.cpt[0][1]).margin(1e-12));
  CHECK(a.decision.verdict == Verdict::Allow);
  CHECK(rig.runtime.state().pending_approvals.empty());
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Executed);
  CHECK(rig.count("step_executed") == 1);

  rig.runtime.advance();
  CHECK(rig.runtime.state().mode == Mode::Completed);
  const auto last = rig.audit->records().back();
  CHECK(last.kind == "procedure_completed");
  CHECK(last.detail.at("systemic_hep").get<double>() == Approx(a.step_hep).margin(1e-15));
  CHECK(error_of([&] { rig.runtime.evaluate_current_step(); }) == ErrorCode::InvalidState);
}

TEST_CASE("Screen Navigation 1 under a tight budget is gated on HSI complexity", "[runtime]") {
  Rig rig(make_scenario(kSn1));
  rig.activate();
  const auto a = rig.runtime.evaluate_current_step(10.0);
  CHECK(a.decision.verdict != Verdict::Allow);
  CHECK(a.decision.approval_required);
  CHECK(a.pifs.at(std::string(pif::kHsiComplexity)) == PifLevel::High);
  bool named = false;
  for (const auto& f : a.decision.explanation) named |= f.kind == "pif" && f.name == pif::kHsiComplexity;
  CHECK(named);
  CHECK(approval_id_of(rig.runtime) == "apr-0001");
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Intended);
  const auto rec = rig.audit->records().back();
  CHECK(rec.kind == "assessment");
  CHECK(rec.detail.at("approval_id") == "apr-0001");
  CHECK(rec.detail.at("expires_at").get<Tick>() == rig.t + 600);
}

TEST_CASE("Approving a live token executes the step once", "[runtime]") {
  Rig rig(make_scenario(kSn1));
  rig.activate();
  rig.runtime.evaluate_current_step(10.0);
  const auto id = approval_id_of(rig.runtime);
  rig.runtime.submit_approval(id, ApprovalDecision::Approved);
  CHECK(rig.runtime.state().pending_approvals.empty());
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Executed);
  const auto records = rig.audit->records();
  const auto& approval = records[records.size() - 2];
  CHECK(approval.kind == "approval");
  CHECK(approval.actor == Actor::Human);
  CHECK(approval.operator_action == OperatorAction::Approved);
  CHECK(records.back().kind == "step_executed");
  CHECK(records.back().actor == Actor::Human);
  CHECK(records.back().detail.at("approval_id") == id);

  CHECK(error_of([&] { rig.runtime.submit_approval(id, ApprovalDecision::Approved); }) == ErrorCode::UnknownApproval);
}

TEST_CASE("Rejection leaves the step intended", "[runtime]") {
  Rig rig(make_scenario(kSn1));
  rig.activate();
  rig.runtime.evaluate_current_step(10.0);
  rig.runtime.submit_approval(approval_id_of(rig.runtime), ApprovalDecision::Rejected);
  CHECK(rig.runtime.state().pending_approvals.empty());
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Intended);
  CHECK(rig.runtime.state().resolved_approvals.begin()->second == Resolution::Rejected);
  CHECK(error_of([&] { rig.runtime.advance(); }) == ErrorCode::StepNotExecuted);
  CHECK(error_of([&] { rig.runtime.execute_current_step(); }) == ErrorCode::InvalidState);
}

TEST_CASE("Approving after expiry fails and leaves the step unchanged", "[runtime]") {
  Rig rig(make_scenario(kSn1));
  rig.activate();
  rig.runtime.evaluate_current_step(10.0);
  const auto id = approval_id_of(rig.runtime);
  const auto expires = rig.runtime.state().pending_approvals.at(id).token.expires_at;

  rig.runtime.advance_clock(600);
  REQUIRE(rig.runtime.state().clock == expires);
  // Still live at exactly expires_at.
  rig.runtime.advance_clock(1);
  CHECK(error_of([&] { rig.runtime.submit_approval(id, ApprovalDecision::Approved); }) == ErrorCode::ExpiredApproval);
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Intended);
  CHECK(rig.runtime.state().pending_approvals.empty());
  CHECK(rig.count("approval_expired") == 1);
  CHECK(rig.count("step_executed") == 0);
  CHECK(error_of([&] { rig.runtime.submit_approval(id, ApprovalDecision::Approved); }) == ErrorCode::UnknownApproval);
}

TEST_CASE("Token at exactly expires_at is still accepted", "[runtime]") {
  Rig rig(make_scenario(kSn1));
  rig.activate();
  rig.runtime.evaluate_current_step(10.0);
  rig.runtime.advance_clock(600);
  rig.runtime.submit_approval(approval_id_of(rig.runtime), ApprovalDecision::Approved);
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Executed);
}

TEST_CASE("Re-evaluating a gated step supersedes its token", "[runtime]") {
  Rig rig(make_scenario(kSn1));
  rig.activate();
  rig.runtime.evaluate_current_step(10.0);
  rig.runtime.evaluate_current_step(10.0);
  CHECK(approval_id_of(rig.runtime) == "apr-0002");
  CHECK(rig.count("approval_superseded") == 1);
  CHECK(rig.runtime.state().resolved_approvals.at("apr-0001") == Resolution::Superseded);
  CHECK(error_of([&] { rig.runtime.submit_approval("apr-0001", ApprovalDecision::Approved); }) ==
        ErrorCode::UnknownApproval);
}

TEST_CASE("Advance requires an executed step", "[runtime]") {
  auto sc = make_scenario(kOneStep);
  sc->auto_execute_allowed = false;
  Rig rig(sc);
  rig.activate();
  CHECK(error_of([&] { rig.runtime.advance(); }) == ErrorCode::StepNotExecuted);
  CHECK(error_of([&] { rig.runtime.execute_current_step(); }) == ErrorCode::LifecycleViolation);
  const auto a = rig.runtime.evaluate_current_step();
  REQUIRE(a.decision.verdict == Verdict::Allow);
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Intended);
  rig.runtime.execute_current_step();
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Executed);
  CHECK(error_of([&] { rig.runtime.evaluate_current_step(); }) == ErrorCode::InvalidState);
  rig.runtime.advance();
  CHECK(rig.runtime.state().mode == Mode::Completed);
}

TEST_CASE("Two steps at HEP 0.01 give systemic HEP 0.0199", "[runtime]") {
  auto sc = make_scenario(kTwoSteps);
  // Detection fails at 0.01, action execution at a negligible rate; the
  // enormous time budget drives P_t to zero.
  sc->pif_model.functions[CognitiveFunction::Detection].base_hep = 0.01;
  sc->pif_model.functions[CognitiveFunction::ActionExecution].base_hep = 1e-300;
  sc->gate.bands.p_c_moderate = 0.5;
  sc->gate.bands.p_c_high = 0.9;
  sc->default_t_avail_s = 1e9;
  Rig rig(sc);
  rig.activate();
  for (int i = 0; i < 2; ++i) {
    const auto a = rig.runtime.evaluate_current_step();
    REQUIRE(a.decision.verdict == Verdict::Allow);
    CHECK(a.step_hep == Approx(0.01).margin(1e-15));
    rig.runtime.advance();
  }
  CHECK(rig.runtime.state().mode == Mode::Completed);
  CHECK(rig.runtime.current_systemic_hep() == Approx(0.0199).margin(1e-12));
  const auto last = rig.audit->records().back();
  CHECK(last.kind == "procedure_completed");
  CHECK(last.detail.at("systemic_hep").get<double>() == Approx(0.0199).margin(1e-12));
}

TEST_CASE("Slow assessor times out", "[runtime]") {
  auto sc = make_scenario(kOneStep);
  sc->pif_model.assessor_deadline = std::chrono::milliseconds(20);
  Rig rig(sc, "EV-X", std::make_shared<SlowAssessor>());
  rig.activate();
  CHECK(error_of([&] { rig.runtime.evaluate_current_step(); }) == ErrorCode::AssessorTimeout);
  CHECK(rig.runtime.state().active_procedure->current().lifecycle == Lifecycle::Pending);
}

TEST_CASE("Audit sequence has no gaps across a run", "[runtime]") {
  Rig rig(make_scenario(kSn1 + "[STEP S9 screen_navigation] x\ntarget: home_button\n"));
  rig.activate();
  rig.runtime.evaluate_current_step(10.0);
  rig.runtime.submit_approval(approval_id_of(rig.runtime), ApprovalDecision::Approved);
  rig.runtime.advance();
  rig.runtime.evaluate_current_step();
  rig.runtime.advance();
  const auto records = rig.audit->records();
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].seq == i + 1);
  CHECK(rig.runtime.state().mode == Mode::Completed);
}

TEST_CASE("State and procedure views", "[runtime]") {
  Rig rig(make_scenario(kSn1));
  CHECK(to_json(rig.runtime.state()).at("mode") == "Idle");
  rig.activate();
  rig.runtime.evaluate_current_step(10.0);
  const auto state = to_json(rig.runtime.state());
  CHECK(state.at("mode") == "EventActive");
  CHECK(state.at("pending_approvals").size() == 1);
  const auto view = procedure_view(rig.runtime.state());
  const auto& step = view.at("steps").at(0);
  CHECK(step.at("lifecycle") == "Intended");
  CHECK(step.at("path").at("nodes").size() == 12);
  CHECK_FALSE(step.at("assessment").is_null());
}
