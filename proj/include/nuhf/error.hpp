#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nuhf {

enum class ErrorCode {
  // graph
  DuplicateId,
  MissingParent,
  UnknownElement,
  OutOfBounds,
  InvalidEdge,
  Unreachable,
  UnsupportedFormat,
  InvalidGraph,
  // procedures
  MalformedStep,
  DuplicateStep,
  UnresolvableTarget,
  AmbiguousTarget,
  LifecycleViolation,
  // models and configuration
  InvalidArgument,
  MissingConfig,
  CyclicTopology,
  UnnormalizedCpt,
  UnknownNode,
  UnknownState,
  InvalidThresholds,
  AssessorTimeout,
  // telemetry
  NonMonotonicTime,
  MissingColumn,
  UnparseableNumber,
  InsufficientFrames,
  DimensionMismatch,
  // runtime
  UnknownEvent,
  InvalidState,
  UnknownApproval,
  ExpiredApproval,
  StepNotExecuted,
  // io
  Io,
  Parse,
};

/// Stable kebab-case name, used in JSON error payloads and CLI messages.
constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "duplicate-id";
    case ErrorCode::MissingParent: return "missing-parent";
    case ErrorCode::UnknownElement: return "unknown-element";
    case ErrorCode::OutOfBounds: return "out-of-bounds";
    case ErrorCode::InvalidEdge: return "invalid-edge";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::UnsupportedFormat: return "unsupported-format";
    case ErrorCode::InvalidGraph: return "invalid-graph";
    case ErrorCode::MalformedStep: return "malformed-step";
    case ErrorCode::DuplicateStep: return "duplicate-step";
    case ErrorCode::UnresolvableTarget: return "unresolvable-target";
    case ErrorCode::AmbiguousTarget: return "ambiguous-target";
    case ErrorCode::LifecycleViolation: return "lifecycle-violation";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::MissingConfig: return "missing-config";
    case ErrorCode::CyclicTopology: return "cyclic-topology";
    case ErrorCode::UnnormalizedCpt: return "unnormalized-cpt";
    case ErrorCode::UnknownNode: return "unknown-node";
    case ErrorCode::UnknownState: return "unknown-state";
    case ErrorCode::InvalidThresholds: return "invalid-thresholds";
    case ErrorCode::AssessorTimeout: return "assessor-timeout";
    case ErrorCode::NonMonotonicTime: return "non-monotonic-time";
    case ErrorCode::MissingColumn: return "missing-column";
    case ErrorCode::UnparseableNumber: return "unparseable-number";
    case ErrorCode::InsufficientFrames: return "insufficient-frames";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::UnknownEvent: return "unknown-event";
    case ErrorCode::InvalidState: return "invalid-state";
    case ErrorCode::UnknownApproval: return "unknown-approval";
    case ErrorCode::ExpiredApproval: return "expired-approval";
    case ErrorCode::StepNotExecuted: return "step-not-executed";
    case ErrorCode::Io: return "io-error";
    case ErrorCode::Parse: return "parse-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace nuhf
