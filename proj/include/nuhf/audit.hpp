#pragma once

// Append-only audit trail. Records are numbered from 1 without gaps, never
// modified after append, and optionally mirrored to a JSON-lines file with
// one record per line. Timestamps are runtime ticks, never wall-clock time,
// so identical inputs reproduce a byte-identical file.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nuhf/perception.hpp"
#include "nuhf/safety_gate.hpp"

namespace nuhf {

enum class OperatorAction { None, Approved, Rejected };
enum class Actor { System, Human };

std::string_view to_string(OperatorAction action);
std::string_view to_string(Actor actor);
OperatorAction parse_operator_action(std::string_view text);
Actor parse_actor(std::string_view text);

namespace audit_kind {
inline constexpr std::string_view kEventDetected = "event_detected";
inline constexpr std::string_view kUnknownEvent = "unknown_event";
inline constexpr std::string_view kAssessment = "assessment";
inline constexpr std::string_view kApprovalSuperseded = "approval_superseded";
inline constexpr std::string_view kApproval = "approval";
inline constexpr std::string_view kApprovalExpired = "approval_expired";
inline constexpr std::string_view kStepExecuted = "step_executed";
inline constexpr std::string_view kAdvance = "advance";
inline constexpr std::string_view kProcedureCompleted = "procedure_completed";
}  // namespace audit_kind

struct AuditRecord {
  std::uint64_t seq = 0;
  Tick tick = 0;
  std::string kind;
  std::string step_id;
  std::optional<double> p_t;
  std::optional<double> p_c;
  std::optional<double> action_risk;
  std::optional<Verdict> verdict;
  std::vector<Factor> explanation;
  OperatorAction operator_action = OperatorAction::None;
  Actor actor = Actor::System;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

nlohmann::ordered_json to_json(const Factor& factor);
Factor factor_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const AuditRecord& record);
AuditRecord audit_record_from_json(const nlohmann::json& j);

/// Parses a JSON-lines audit file.
std::vector<AuditRecord> read_audit_log(std::string_view jsonl);

class AuditLog {
 public:
  AuditLog() = default;
  /// Mirrors every record to `path`, truncating any previous content.
  explicit AuditLog(const std::filesystem::path& path);

  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  /// Assigns the next sequence number and returns it.
  std::uint64_t append(AuditRecord record);

  std::vector<AuditRecord> records() const;
  std::vector<AuditRecord> since(std::uint64_t seq) const;
  std::uint64_t last_seq() const;

  /// Blocks until a record newer than `seq` exists or `timeout` passes.
  bool wait_newer(std::uint64_t seq, std::chrono::milliseconds timeout) const;

 private:
  mutable std::mutex mutex_;
  mutable std::condition_variable appended_;
  std::vector<AuditRecord> records_;
  std::optional<std::ofstream> sink_;
};

}  // namespace nuhf
