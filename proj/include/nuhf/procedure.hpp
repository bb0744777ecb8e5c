#pragma once

// Structured procedures: parsing, compilation onto the IE-KG, the two-step
// (intend, then execute) lifecycle, and valve checklist verification.
//
// Procedure text format, one block per step:
//
//   title: Reactor Shutdown
//   # comment
//   [STEP SN1 screen_navigation] Open the moisture separator valve group
//   target: Screen Lookup
//   target: LBH50AA101
//   expect: LBH10AA101=Closed
//
// Targets are element ids or labels. Blank lines and '#' comments are ignored.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nuhf/iekg.hpp"

namespace nuhf {

enum class StepKind { FlowchartExecution, ScreenNavigation, TopLeftToggle, ParameterCheck, Checklist };
enum class Lifecycle { Pending, Intended, Executed };
enum class ValveState { Open, Closed, Auto };

std::string_view to_string(StepKind kind);
std::string_view to_string(Lifecycle lifecycle);
std::string_view to_string(ValveState state);
StepKind parse_step_kind(std::string_view text);
ValveState parse_valve_state(std::string_view text);

struct ProcedureStep {
  std::string id;
  std::string text;
  StepKind kind = StepKind::ScreenNavigation;
  std::vector<std::string> targets;
  std::map<std::string, ValveState> expected_states;
  Lifecycle lifecycle = Lifecycle::Pending;
};

struct Procedure {
  std::string title;
  std::vector<ProcedureStep> steps;
};

Procedure parse_procedure(std::string_view document);

struct PathNode {
  std::string element_id;
  std::string label;
  std::optional<ScreenPoint> coords;
  NavAction action = NavAction::Navigate;
};

struct ExecutionPath {
  std::string step_id;
  StepKind step_kind = StepKind::ScreenNavigation;
  std::vector<PathNode> nodes;
  bool multi_action = false;
};

/// Resolves a target to an element id: exact id, then unique exact label,
/// then unique case-insensitive id or label.
std::string resolve_target(const IEKG& graph, std::string_view target);

/// Routes through every target in order and concatenates the hops,
/// collapsing consecutive repeats.
ExecutionPath compile_step(const ProcedureStep& step, const IEKG& graph);

ProcedureStep mark_intended(ProcedureStep step);
ProcedureStep mark_executed(ProcedureStep step);

struct ChecklistItem {
  int index = 0;
  std::string valve_code;
  std::string valve_name;
  ValveState expected = ValveState::Open;
  std::optional<ValveState> actual;
};

struct ChecklistMismatch {
  int index = 0;
  std::string valve_code;
  ValveState expected = ValveState::Open;
  std::optional<ValveState> observed;  // empty when the valve was not observed
};

bool is_valid_valve_code(std::string_view code);

/// CSV with header `index,valve_code,valve_name,expected`.
std::vector<ChecklistItem> parse_checklist_csv(std::string_view text);

std::vector<ChecklistMismatch> verify_checklist(const std::vector<ChecklistItem>& items,
                                                const std::map<std::string, ValveState>& observed);

}  // namespace nuhf
