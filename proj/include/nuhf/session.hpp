#pragma once

// Drives a Runtime through a scenario: telemetry in, steps evaluated in
// order, approvals taken from a script or from outside (the HTTP API).
//
// Scripted approvals are keyed by issue ordinal (the n-th token issued in the
// run is ordinal n). A decision lands when the clock reaches the token's
// issue tick plus `delay_ticks`; telemetry moves the clock, and once the
// stream is exhausted the clock jumps straight to the due tick. A late
// decision finds the token expired, and the step is evaluated again under a
// fresh token. The run halts on a rejection or on a token the script does
// not cover; the gated step then stays Intended.
//
// approvals.json:
//   [{"ordinal": 1, "decision": "approved"}, {"ordinal": 2, "decision": "rejected", "delay_ticks": 40}]
// An ordinal of "*" sets the decision for every token not listed explicitly.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nuhf/runtime.hpp"

namespace nuhf {

struct ScriptedDecision {
  ApprovalDecision decision = ApprovalDecision::Approved;
  Tick delay_ticks = 0;
};

struct ApprovalScript {
  std::map<std::uint64_t, ScriptedDecision> by_ordinal;
  std::optional<ScriptedDecision> fallback;

  std::optional<ScriptedDecision> lookup(std::uint64_t ordinal) const;
};

ApprovalScript parse_approval_script(std::string_view json_text);

struct RunRow {
  std::uint64_t evaluation = 0;  // 1-based count of evaluations in the run
  std::string step_id;
  Tick tick = 0;
  RiskAssessment assessment;
  std::optional<std::string> approval_id;
  std::string outcome;  // executed, approved, rejected, expired, pending
};

struct RunReport {
  std::string scenario_id;
  std::optional<EventLabel> event;
  std::string procedure_title;
  std::vector<RunRow> rows;
  std::size_t executed_steps = 0;
  std::size_t step_count = 0;
  double systemic_hep = 0.0;
  std::string final_mode;
  std::string halt_reason;
  std::string audit_path;
};

nlohmann::ordered_json to_json(const RunReport& report);

class Session {
 public:
  /// Without a script every gated step waits for `submit`.
  Session(std::shared_ptr<const Scenario> scenario, std::shared_ptr<AuditLog> audit,
          std::optional<ApprovalScript> script = std::nullopt, std::shared_ptr<const PifAssessor> assessor = nullptr,
          std::shared_ptr<const EventDetector> detector = nullptr);

  const Runtime& runtime() const { return runtime_; }
  const std::shared_ptr<AuditLog>& audit_log() const { return audit_; }

  void bind_telemetry(const std::vector<std::string>& columns) { runtime_.bind_telemetry(columns); }
  void feed(const TelemetryFrame& frame);
  /// End of telemetry: scripted decisions still outstanding are delivered.
  void finish();
  /// External decision. Errors from the runtime propagate after the session
  /// has re-driven the procedure (an expired token is replaced at once).
  void submit(const std::string& approval_id, ApprovalDecision decision);

  /// A token is live and only an external decision can resolve it.
  bool awaiting_approval() const;
  bool halted() const { return !halt_reason_.empty(); }
  const std::string& halt_reason() const { return halt_reason_; }

  RunReport report() const;

 private:
  void drive(bool end_of_stream);
  void evaluate();
  void apply(const std::string& approval_id, ApprovalDecision decision);
  void resolve(const std::string& approval_id, std::string outcome);
  std::optional<std::string> live_token() const;

  std::shared_ptr<AuditLog> audit_;
  Runtime runtime_;
  std::optional<ApprovalScript> script_;
  std::vector<RunRow> rows_;
  std::map<std::string, std::size_t> evaluations_per_step_;
  std::map<std::string, std::uint64_t> ordinals_;  // approval_id -> issue ordinal
  std::string halt_reason_;
};

struct ReplayOptions {
  std::filesystem::path telemetry;
  std::filesystem::path scenario;
  std::filesystem::path config_dir;
  std::optional<std::filesystem::path> approvals;
  std::filesystem::path out_dir;
};

/// Headless run. Writes `audit.jsonl` and `report.json` into `out_dir`.
RunReport run_replay(const ReplayOptions& options);

TelemetryStream load_telemetry(const std::filesystem::path& path, const Scenario& scenario);

}  // namespace nuhf
