#include "nuhf/procedure.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include "nuhf/error.hpp"
#include "nuhf/detail/text_util.hpp"

namespace nuhf {

namespace {

constexpr std::pair<StepKind, std::string_view> kStepKinds[] = {
    {StepKind::FlowchartExecution, "flowchart_execution"},
    {StepKind::ScreenNavigation, "screen_navigation"},
    {StepKind::TopLeftToggle, "top_left_toggle"},
    {StepKind::ParameterCheck, "parameter_check"},
    {StepKind::Checklist, "checklist"},
};

constexpr std::pair<ValveState, std::string_view> kValveStates[] = {
    {ValveState::Open, "Open"},
    {ValveState::Closed, "Closed"},
    {ValveState::Auto, "Auto"},
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

NavAction entry_action(ElementKind kind) {
  switch (kind) {
    case ElementKind::Toggle: return NavAction::Toggle;
    case ElementKind::Lookup: return NavAction::Lookup;
    case ElementKind::Button:
    case ElementKind::ValveControl: return NavAction::Click;
    default: return NavAction::Navigate;
  }
}

NavAction edge_action(const IEKG& graph, const std::string& from, const std::string& to) {
  for (const auto& e : graph.edges())
    if (e.from == from && e.to == to) return e.action;
  return NavAction::Navigate;
}

}  // namespace

std::string_view to_string(StepKind kind) {
  for (const auto& [k, name] : kStepKinds)
    if (k == kind) return name;
  return "screen_navigation";
}

std::string_view to_string(Lifecycle lifecycle) {
  switch (lifecycle) {
    case Lifecycle::Pending: return "Pending";
    case Lifecycle::Intended: return "Intended";
    case Lifecycle::Executed: return "Executed";
  }
  return "Pending";
}

std::string_view to_string(ValveState state) {
  for (const auto& [s, name] : kValveStates)
    if (s == state) return name;
  return "Open";
}

StepKind parse_step_kind(std::string_view text) {
  for (const auto& [k, name] : kStepKinds)
    if (name == text) return k;
  throw Error(ErrorCode::MalformedStep, "unknown step kind '" + std::string(text) + "'");
}

ValveState parse_valve_state(std::string_view text) {
  for (const auto& [s, name] : kValveStates)
    if (lower(name) == lower(text)) return s;
  throw Error(ErrorCode::Parse, "unknown valve state '" + std::string(text) + "'");
}

Procedure parse_procedure(std::string_view document) {
  Procedure procedure;
  std::set<std::string> seen;
  int line_no = 0;

  auto finish_step = [&](const ProcedureStep& step) {
    if (step.targets.empty() && step.kind != StepKind::Checklist) {
      throw Error(ErrorCode::MalformedStep, "step " + step.id + " has no targets");
    }
    if (step.kind == StepKind::Checklist && step.targets.empty() && step.expected_states.empty()) {
      throw Error(ErrorCode::MalformedStep, "checklist step " + step.id + " has neither targets nor expectations");
    }
  };

  std::istringstream in{std::string(document)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.empty() || line.front() == '#') continue;

    if (line.rfind("[STEP", 0) == 0) {
      const auto close = line.find(']');
      if (close == std::string::npos) throw Error(ErrorCode::MalformedStep, "unterminated step header" + where);
      std::istringstream header(line.substr(5, close - 5));
      std::string id, kind, extra;
      header >> id >> kind >> extra;
      if (id.empty() || kind.empty() || !extra.empty()) {
        throw Error(ErrorCode::MalformedStep, "expected [STEP <id> <kind>]" + where);
      }
      if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateStep, id + where);
      if (!procedure.steps.empty()) finish_step(procedure.steps.back());
      ProcedureStep step;
      step.id = id;
      step.kind = parse_step_kind(kind);
      step.text = detail::trim(line.substr(close + 1));
      procedure.steps.push_back(std::move(step));
      continue;
    }

    const auto colon = line.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::MalformedStep, "unrecognised line" + where);
    const std::string key = detail::trim(line.substr(0, colon));
    const std::string value = detail::trim(line.substr(colon + 1));

    if (key == "title" && procedure.steps.empty()) {
      procedure.title = value;
    } else if (procedure.steps.empty()) {
      throw Error(ErrorCode::MalformedStep, "'" + key + "' outside a step block" + where);
    } else if (key == "target") {
      if (value.empty()) throw Error(ErrorCode::MalformedStep, "empty target" + where);
      procedure.steps.back().targets.push_back(value);
    } else if (key == "expect") {
      const auto eq = value.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::MalformedStep, "expect needs code=State" + where);
      procedure.steps.back().expected_states[detail::trim(value.substr(0, eq))] =
          parse_valve_state(detail::trim(value.substr(eq + 1)));
    } else {
      throw Error(ErrorCode::MalformedStep, "unknown key '" + key + "'" + where);
    }
  }
  if (!procedure.steps.empty()) finish_step(procedure.steps.back());
  return procedure;
}

std::string resolve_target(const IEKG& graph, std::string_view target) {
  if (graph.contains(target)) return std::string(target);

  std::vector<std::string> exact;
  for (const auto& e : graph.elements())
    if (e.label == target) exact.push_back(e.id);
  if (exact.size() == 1) return exact.front();
  if (exact.size() > 1) {
    throw Error(ErrorCode::AmbiguousTarget, "'" + std::string(target) + "' labels " + std::to_string(exact.size()) +
                                                " elements; name one by id");
  }

  const std::string wanted = lower(target);
  std::vector<std::string> folded;
  for (const auto& e : graph.elements())
    if (lower(e.label) == wanted || lower(e.id) == wanted) folded.push_back(e.id);
  if (folded.size() == 1) return folded.front();
  if (folded.size() > 1) {
    throw Error(ErrorCode::AmbiguousTarget, "'" + std::string(target) + "' matches " + std::to_string(folded.size()) +
                                                " elements ignoring case");
  }
  throw Error(ErrorCode::UnresolvableTarget, "'" + std::string(target) + "'");
}

ExecutionPath compile_step(const ProcedureStep& step, const IEKG& graph) {
  ExecutionPath path;
  path.step_id = step.id;
  path.step_kind = step.kind;

  std::vector<std::string> ids;
  for (const auto& target : step.targets) {
    std::string id;
    try {
      id = resolve_target(graph, target);
    } catch (const Error& ex) {
      throw Error(ex.code(), "step " + step.id + ": " + ex.detail());
    }
    if (ids.empty()) {
      ids.push_back(id);
      continue;
    }
    std::vector<std::string> hop;
    try {
      hop = graph.resolve_path(ids.back(), id);
    } catch (const Error& ex) {
      throw Error(ex.code(), "step " + step.id + ": " + ex.detail());
    }
    for (auto& node : hop)
      if (node != ids.back()) ids.push_back(std::move(node));
  }

  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& e = graph.element(ids[i]);
    PathNode node{e.id, e.label, e.coords, entry_action(e.kind)};
    if (i > 0) node.action = edge_action(graph, ids[i - 1], ids[i]);
    path.nodes.push_back(std::move(node));
  }
  path.multi_action = path.nodes.size() > 1;
  return path;
}

ProcedureStep mark_intended(ProcedureStep step) {
  if (step.lifecycle != Lifecycle::Pending) {
    throw Error(ErrorCode::LifecycleViolation,
                "step " + step.id + " is " + std::string(to_string(step.lifecycle)) + ", expected Pending");
  }
  step.lifecycle = Lifecycle::Intended;
  return step;
}

ProcedureStep mark_executed(ProcedureStep step) {
  if (step.lifecycle != Lifecycle::Intended) {
    throw Error(ErrorCode::LifecycleViolation,
                "step " + step.id + " is " + std::string(to_string(step.lifecycle)) + ", expected Intended");
  }
  step.lifecycle = Lifecycle::Executed;
  return step;
}

bool is_valid_valve_code(std::string_view code) {
  // Plant code: system letters, train number, component letters, serial.
  static const std::regex pattern("[A-Z]{3}[0-9]{1,2}[A-Z]{2}[0-9]{3}");
  return std::regex_match(code.begin(), code.end(), pattern);
}

std::vector<ChecklistItem> parse_checklist_csv(std::string_view text) {
  const auto rows = detail::parse_csv(text);
  if (rows.empty()) return {};
  const auto& header = rows.front();
  auto column = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_index = column("index");
  const auto c_code = column("valve_code");
  const auto c_name = column("valve_name");
  const auto c_expected = column("expected");

  std::vector<ChecklistItem> items;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw Error(ErrorCode::Parse, "checklist row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                        " fields, header has " + std::to_string(header.size()));
    }
    ChecklistItem item;
    item.index = static_cast<int>(detail::parse_number(row[c_index]));
    item.valve_code = row[c_code];
    item.valve_name = row[c_name];
    item.expected = parse_valve_state(row[c_expected]);
    if (!is_valid_valve_code(item.valve_code)) throw Error(ErrorCode::Parse, "bad valve code '" + item.valve_code + "'");
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<ChecklistMismatch> verify_checklist(const std::vector<ChecklistItem>& items,
                                                const std::map<std::string, ValveState>& observed) {
  std::vector<ChecklistMismatch> mismatches;
  for (const auto& item : items) {
    auto it = observed.find(item.valve_code);
    if (it == observed.end()) {
      mismatches.push_back({item.index, item.valve_code, item.expected, std::nullopt});
    } else if (it->second != item.expected) {
      mismatches.push_back({item.index, item.valve_code, item.expected, it->second});
    }
  }
  return mismatches;
}

}  // namespace nuhf
