#include "nuhf/session.hpp"

#include <fstream>

#include "nuhf/detail/text_util.hpp"
#include "nuhf/error.hpp"

namespace nuhf {

namespace {

// Bounds the expire/re-evaluate cycle when a script always answers late.
constexpr std::size_t kMaxEvaluationsPerStep = 16;

}  // namespace

std::optional<ScriptedDecision> ApprovalScript::lookup(std::uint64_t ordinal) const {
  auto it = by_ordinal.find(ordinal);
  if (it != by_ordinal.end()) return it->second;
  return fallback;
}

ApprovalScript parse_approval_script(std::string_view json_text) {
  ApprovalScript script;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_array()) throw Error(ErrorCode::Parse, "approvals script must be a JSON list");
    for (const auto& entry : doc) {
      ScriptedDecision d;
      d.decision = parse_approval_decision(entry.at("decision").get<std::string>());
      d.delay_ticks = entry.value("delay_ticks", Tick{0});
      if (d.delay_ticks < 0) throw Error(ErrorCode::Parse, "delay_ticks must not be negative");
      const auto& ordinal = entry.at("ordinal");
      if (ordinal.is_string() && ordinal.get<std::string>() == "*") {
        script.fallback = d;
        continue;
      }
      const auto n = ordinal.get<std::int64_t>();
      if (n < 1) throw Error(ErrorCode::Parse, "ordinals start at 1");
      if (!script.by_ordinal.emplace(static_cast<std::uint64_t>(n), d).second) {
        throw Error(ErrorCode::Parse, "ordinal " + std::to_string(n) + " listed twice");
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("approvals script: ") + ex.what());
  }
  return script;
}

Session::Session(std::shared_ptr<const Scenario> scenario, std::shared_ptr<AuditLog> audit,
                 std::optional<ApprovalScript> script, std::shared_ptr<const PifAssessor> assessor,
                 std::shared_ptr<const EventDetector> detector)
    : audit_(audit),
      runtime_(std::move(scenario), std::move(audit), std::move(assessor), std::move(detector)),
      script_(std::move(script)) {}

void Session::feed(const TelemetryFrame& frame) {
  runtime_.tick(std::span<const TelemetryFrame>(&frame, 1));
  drive(false);
}

void Session::finish() { drive(true); }

void Session::submit(const std::string& approval_id, ApprovalDecision decision) {
  try {
    apply(approval_id, decision);
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::ExpiredApproval) drive(false);
    throw;
  }
  drive(false);
}

void Session::apply(const std::string& approval_id, ApprovalDecision decision) {
  try {
    runtime_.submit_approval(approval_id, decision);
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::ExpiredApproval) resolve(approval_id, "expired");
    throw;
  }
  if (decision == ApprovalDecision::Approved) {
    resolve(approval_id, "approved");
  } else {
    resolve(approval_id, "rejected");
    halt_reason_ = approval_id + " rejected";
  }
}

std::optional<std::string> Session::live_token() const {
  const auto& state = runtime_.state();
  if (!state.active_procedure || state.active_procedure->finished()) return std::nullopt;
  const auto& step_id = state.active_procedure->current().id;
  for (const auto& [id, pending] : state.pending_approvals) {
    if (pending.token.step_id == step_id) return id;
  }
  return std::nullopt;
}

bool Session::awaiting_approval() const {
  return !script_ && !halted() && runtime_.state().mode == Mode::EventActive && live_token().has_value();
}

void Session::resolve(const std::string& approval_id, std::string outcome) {
  for (auto& row : rows_) {
    if (row.approval_id == approval_id) row.outcome = std::move(outcome);
  }
}

void Session::evaluate() {
  const auto& state = runtime_.state();
  const std::string step_id = state.active_procedure->current().id;
  if (++evaluations_per_step_[step_id] > kMaxEvaluationsPerStep) {
    halt_reason_ = "step " + step_id + " evaluated " + std::to_string(kMaxEvaluationsPerStep) + " times without a timely decision";
    return;
  }
  const Tick tick = state.clock;
  RunRow row;
  row.evaluation = rows_.size() + 1;
  row.step_id = step_id;
  row.tick = tick;
  row.assessment = runtime_.evaluate_current_step();
  if (row.assessment.decision.approval_required) {
    row.approval_id = live_token();
    ordinals_[*row.approval_id] = runtime_.state().approvals_issued;
    row.outcome = "pending";
  } else {
    row.outcome = runtime_.state().active_procedure->current().lifecycle == Lifecycle::Executed ? "executed" : "pending";
  }
  rows_.push_back(std::move(row));
}

void Session::drive(bool end_of_stream) {
  while (!halted() && runtime_.state().mode == Mode::EventActive) {
    const auto& state = runtime_.state();
    const auto& proc = *state.active_procedure;
    const auto& step = proc.current();

    if (step.lifecycle == Lifecycle::Executed) {
      runtime_.advance();
      continue;
    }

    if (auto token = live_token()) {
      if (!script_) return;
      const auto& pending = state.pending_approvals.at(*token);
      const auto ordinal = ordinals_.at(*token);
      const auto scripted = script_->lookup(ordinal);
      if (!scripted) {
        halt_reason_ = "no scripted decision for approval ordinal " + std::to_string(ordinal);
        return;
      }
      const Tick due = pending.issued_at + scripted->delay_ticks;
      if (state.clock < due) {
        if (!end_of_stream) return;
        runtime_.advance_clock(due - state.clock);
      }
      try {
        apply(*token, scripted->decision);
      } catch (const Error& ex) {
        if (ex.code() != ErrorCode::ExpiredApproval) throw;
      }
      continue;
    }

    auto latest = proc.latest.find(step.id);
    if (latest != proc.latest.end() && step.lifecycle == Lifecycle::Intended &&
        latest->second.decision.verdict == Verdict::Allow) {
      runtime_.execute_current_step();
      rows_.back().outcome = "executed";
      continue;
    }
    evaluate();
  }
}

RunReport Session::report() const {
  RunReport r;
  const auto& state = runtime_.state();
  r.scenario_id = runtime_.scenario().id;
  r.event = state.active_event;
  if (state.active_procedure) {
    r.procedure_title = state.active_procedure->procedure.title;
    r.step_count = state.active_procedure->procedure.steps.size();
    for (const auto& s : state.active_procedure->procedure.steps) {
      if (s.lifecycle == Lifecycle::Executed) ++r.executed_steps;
    }
  }
  r.rows = rows_;
  r.systemic_hep = runtime_.current_systemic_hep();
  r.final_mode = std::string(to_string(state.mode));
  r.halt_reason = halt_reason_;
  return r;
}

nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["scenario_id"] = r.scenario_id;
  if (r.event) {
    j["detected_event"] = {{"event_id", r.event->event_id},
                           {"name", r.event->name},
                           {"distance", r.event->distance},
                           {"detected_at", r.event->detected_at}};
  } else {
    j["detected_event"] = nullptr;
  }
  j["procedure"] = r.procedure_title;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    const auto& a = row.assessment;
    j["steps"].push_back({{"evaluation", row.evaluation},
                          {"step_id", row.step_id},
                          {"tick", row.tick},
                          {"p_t", a.p_t},
                          {"p_c", a.p_c},
                          {"step_hep", a.step_hep},
                          {"action_risk", a.action_risk},
                          {"verdict", to_string(a.decision.verdict)},
                          {"approval_id", row.approval_id ? nlohmann::ordered_json(*row.approval_id) : nullptr},
                          {"outcome", row.outcome}});
  }
  j["executed_steps"] = r.executed_steps;
  j["step_count"] = r.step_count;
  j["systemic_hep"] = r.systemic_hep;
  j["final_mode"] = r.final_mode;
  j["halt_reason"] = r.halt_reason.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.halt_reason);
  j["audit_path"] = r.audit_path;
  return j;
}

TelemetryStream load_telemetry(const std::filesystem::path& path, const Scenario& scenario) {
  try {
    return ingest(detail::read_file(path), scenario.calibration.names());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::Io) throw;
    throw Error(ex.code(), path.string() + ": " + ex.detail());
  }
}

RunReport run_replay(const ReplayOptions& options) {
  auto scenario = std::make_shared<const Scenario>(load_scenario(options.scenario, options.config_dir));
  const TelemetryStream stream = load_telemetry(options.telemetry, *scenario);
  std::optional<ApprovalScript> script;
  if (options.approvals) {
    try {
      script = parse_approval_script(detail::read_file(*options.approvals));
    } catch (const Error& ex) {
      if (ex.code() == ErrorCode::Io) throw;
      throw Error(ex.code(), options.approvals->string() + ": " + ex.detail());
    }
  } else {
    script = ApprovalScript{};
  }

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + options.out_dir.string() + ": " + ec.message());
  const auto audit_path = options.out_dir / "audit.jsonl";
  auto audit = std::make_shared<AuditLog>(audit_path);

  Session session(scenario, audit, std::move(script));
  session.bind_telemetry(stream.columns);
  for (const auto& frame : stream.frames) session.feed(frame);
  session.finish();

  RunReport report = session.report();
  report.audit_path = audit_path.string();
  std::ofstream out(options.out_dir / "report.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (options.out_dir / "report.json").string());
  out << to_json(report).dump(2) << '\n';
  return report;
}

}  // namespace nuhf
