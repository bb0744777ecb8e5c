#pragma once

// The observe -> map -> evaluate -> gate loop.
//
// Runtime is a plain single-writer state machine: it is not synchronised and
// must be driven from one thread (RuntimeService provides the serialised
// command queue). Every state transition appends at least one audit record.
//
//   Idle --(event detected, procedure mapped)--> EventActive --(last step advanced)--> Completed
//
// Within EventActive each step goes Pending -> Intended (on evaluation) ->
// Executed. A step whose verdict is Suggest or Block reaches Executed only via
// an approved ApprovalToken submitted by a human.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nuhf/audit.hpp"
#include "nuhf/scenario.hpp"

namespace nuhf {

enum class Mode { Idle, EventActive, Completed };
std::string_view to_string(Mode mode);

enum class ApprovalDecision { Approved, Rejected };
std::string_view to_string(ApprovalDecision decision);
ApprovalDecision parse_approval_decision(std::string_view text);

/// How a token left the pending set.
enum class Resolution { Approved, Rejected, Expired, Superseded };
std::string_view to_string(Resolution resolution);

struct ApprovalToken {
  std::string approval_id;
  std::string step_id;
  Tick expires_at = 0;
};

struct PendingApproval {
  ApprovalToken token;
  RiskAssessment assessment;
  Tick issued_at = 0;
};

struct ActiveProcedure {
  std::string event_id;
  Procedure procedure;
  std::size_t cursor = 0;
  std::map<std::string, ExecutionPath> paths;
  std::map<std::string, RiskAssessment> latest;  // step_id -> most recent assessment

  const ProcedureStep& current() const { return procedure.steps.at(cursor); }
  bool finished() const { return cursor >= procedure.steps.size(); }
};

struct RuntimeState {
  Mode mode = Mode::Idle;
  std::optional<EventLabel> active_event;
  std::optional<ActiveProcedure> active_procedure;
  std::map<std::string, PendingApproval> pending_approvals;
  std::map<std::string, Resolution> resolved_approvals;
  Tick clock = 0;
  std::uint64_t approvals_issued = 0;
};

class Runtime {
 public:
  Runtime(std::shared_ptr<const Scenario> scenario, std::shared_ptr<AuditLog> audit,
          std::shared_ptr<const PifAssessor> assessor = nullptr,
          std::shared_ptr<const EventDetector> detector = nullptr);

  const RuntimeState& state() const { return state_; }
  const Scenario& scenario() const { return *scenario_; }
  AuditLog& audit() { return *audit_; }
  const AuditLog& audit() const { return *audit_; }

  /// Declares the column layout of subsequent frames. Until called, frames
  /// are assumed to carry the calibrated parameters in calibration order.
  void bind_telemetry(const std::vector<std::string>& columns);

  /// Consumes telemetry in tick order. In Idle mode each frame feeds
  /// perception; a mapped detection activates its procedure, an unmapped one
  /// is audited once and leaves the runtime Idle.
  void tick(std::span<const TelemetryFrame> frames);

  /// Moves the clock forward without telemetry (operator think time in
  /// scripted replays).
  void advance_clock(Tick ticks);

  /// Evaluates the step under the cursor. `t_avail_s` overrides the
  /// scenario's time budget for the step.
  RiskAssessment evaluate_current_step(std::optional<double> t_avail_s = std::nullopt);

  /// Human decision on a pending token. Expired tokens are audited, removed
  /// and reported as ExpiredApproval; the step stays Intended.
  void submit_approval(const std::string& approval_id, ApprovalDecision decision);

  /// Operator-confirmed execution of an evaluated Allow step, used when the
  /// scenario disables automatic execution.
  void execute_current_step();

  void advance();

  /// Systemic HEP over the steps executed so far.
  double current_systemic_hep() const;

 private:
  AuditRecord record(std::string_view kind, const std::string& step_id = {}) const;
  ActiveProcedure& active();
  ProcedureStep& current_step();
  void mark_step_executed(Actor actor, const std::optional<std::string>& approval_id);

  std::shared_ptr<const Scenario> scenario_;
  std::shared_ptr<AuditLog> audit_;
  std::shared_ptr<const PifAssessor> assessor_;
  std::shared_ptr<const EventDetector> detector_;
  std::optional<PerceptionPipeline> perception_;
  std::optional<std::string> last_unknown_event_;
  bool clock_started_ = false;
  RuntimeState state_;
};

nlohmann::ordered_json to_json(const RiskAssessment& assessment);
nlohmann::ordered_json to_json(const RuntimeState& state);
/// Steps with lifecycle, latest assessment and compiled coordinates.
nlohmann::ordered_json procedure_view(const RuntimeState& state);

}  // namespace nuhf
