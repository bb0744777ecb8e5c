#include "nuhf/runtime.hpp"

#include <algorithm>
#include <cstdio>

#include "nuhf/error.hpp"

namespace nuhf {

namespace {

std::string approval_id_for(std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "apr-%04llu", static_cast<unsigned long long>(n));
  return buf;
}

// A checklist container without navigation targets is read, not operated:
// one search and one value read per expected valve state.
std::vector<PrimitiveAction> checklist_primitives(const ProcedureStep& step) {
  std::vector<PrimitiveAction> out{PrimitiveAction::of(PrimitiveKind::MentalPrep)};
  for (std::size_t i = 0; i < step.expected_states.size(); ++i) {
    out.push_back(PrimitiveAction::of(PrimitiveKind::VisualSearch));
    out.push_back(PrimitiveAction::of(PrimitiveKind::ReadValue));
  }
  return out;
}

nlohmann::ordered_json path_json(const ExecutionPath& path) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& n : path.nodes) {
    nlohmann::ordered_json j;
    j["element_id"] = n.element_id;
    j["label"] = n.label;
    j["x"] = n.coords ? nlohmann::ordered_json(n.coords->x) : nlohmann::ordered_json(nullptr);
    j["y"] = n.coords ? nlohmann::ordered_json(n.coords->y) : nlohmann::ordered_json(nullptr);
    j["action"] = to_string(n.action);
    nodes.push_back(std::move(j));
  }
  return {{"step_id", path.step_id}, {"multi_action", path.multi_action}, {"nodes", std::move(nodes)}};
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Idle: return "Idle";
    case Mode::EventActive: return "EventActive";
    case Mode::Completed: return "Completed";
  }
  return "Idle";
}

std::string_view to_string(ApprovalDecision decision) {
  return decision == ApprovalDecision::Approved ? "approved" : "rejected";
}

ApprovalDecision parse_approval_decision(std::string_view text) {
  if (text == "approved") return ApprovalDecision::Approved;
  if (text == "rejected") return ApprovalDecision::Rejected;
  throw Error(ErrorCode::Parse, "decision must be 'approved' or 'rejected', got '" + std::string(text) + "'");
}

std::string_view to_string(Resolution resolution) {
  switch (resolution) {
    case Resolution::Approved: return "approved";
    case Resolution::Rejected: return "rejected";
    case Resolution::Expired: return "expired";
    case Resolution::Superseded: return "superseded";
  }
  return "approved";
}

Runtime::Runtime(std::shared_ptr<const Scenario> scenario, std::shared_ptr<AuditLog> audit,
                 std::shared_ptr<const PifAssessor> assessor, std::shared_ptr<const EventDetector> detector)
    : scenario_(std::move(scenario)),
      audit_(std::move(audit)),
      assessor_(std::move(assessor)),
      detector_(std::move(detector)) {
  if (!scenario_ || !audit_) throw Error(ErrorCode::InvalidArgument, "runtime needs a scenario and an audit log");
  if (!assessor_) assessor_ = std::make_shared<RuleBasedAssessor>(scenario_->pif_model.thresholds);
  if (!detector_ && !scenario_->signatures.empty()) {
    detector_ = std::make_shared<CentroidDetector>(scenario_->signatures);
  }
  bind_telemetry(scenario_->calibration.names());
}

void Runtime::bind_telemetry(const std::vector<std::string>& columns) {
  perception_.reset();
  if (detector_) perception_.emplace(FeatureExtractor(scenario_->calibration, columns), detector_);
}

AuditRecord Runtime::record(std::string_view kind, const std::string& step_id) const {
  AuditRecord r;
  r.tick = state_.clock;
  r.kind = std::string(kind);
  r.step_id = step_id;
  return r;
}

ActiveProcedure& Runtime::active() {
  if (state_.mode != Mode::EventActive || !state_.active_procedure) {
    throw Error(ErrorCode::InvalidState, "no active procedure (mode " + std::string(to_string(state_.mode)) + ")");
  }
  return *state_.active_procedure;
}

ProcedureStep& Runtime::current_step() {
  auto& proc = active();
  if (proc.finished()) throw Error(ErrorCode::InvalidState, "cursor is past the last step");
  return proc.procedure.steps[proc.cursor];
}

void Runtime::tick(std::span<const TelemetryFrame> frames) {
  for (const auto& frame : frames) {
    if (clock_started_ && frame.time <= state_.clock) {
      throw Error(ErrorCode::NonMonotonicTime,
                  "frame at tick " + std::to_string(frame.time) + " after clock " + std::to_string(state_.clock));
    }
    clock_started_ = true;
    state_.clock = frame.time;
    if (state_.mode != Mode::Idle || !perception_) continue;

    auto label = perception_->push(frame);
    if (!label) {
      last_unknown_event_.reset();
      continue;
    }
    auto mapped = scenario_->procedures.find(label->event_id);
    if (mapped == scenario_->procedures.end()) {
      if (last_unknown_event_ != label->event_id) {
        auto r = record(audit_kind::kUnknownEvent);
        r.detail["event_id"] = label->event_id;
        r.detail["name"] = label->name;
        r.detail["distance"] = label->distance;
        audit_->append(std::move(r));
        last_unknown_event_ = label->event_id;
      }
      continue;
    }

    ActiveProcedure proc;
    proc.event_id = label->event_id;
    proc.procedure = mapped->second;
    for (const auto& step : proc.procedure.steps) {
      if (step.targets.empty()) continue;
      try {
        proc.paths.emplace(step.id, compile_step(step, scenario_->graph));
      } catch (const Error&) {
        // Reported with step context when the step is evaluated.
      }
    }
    state_.mode = Mode::EventActive;
    state_.active_event = *label;
    state_.active_procedure = std::move(proc);
    perception_->reset();

    auto r = record(audit_kind::kEventDetected);
    r.detail["event_id"] = label->event_id;
    r.detail["name"] = label->name;
    r.detail["distance"] = label->distance;
    r.detail["procedure"] = state_.active_procedure->procedure.title;
    r.detail["steps"] = state_.active_procedure->procedure.steps.size();
    audit_->append(std::move(r));
  }
}

void Runtime::advance_clock(Tick ticks) {
  if (ticks < 0) throw Error(ErrorCode::InvalidArgument, "clock cannot move backwards");
  state_.clock += ticks;
  clock_started_ = true;
}

RiskAssessment Runtime::evaluate_current_step(std::optional<double> t_avail_s) {
  auto& proc = active();
  auto& step = current_step();
  if (step.lifecycle == Lifecycle::Executed) {
    throw Error(ErrorCode::InvalidState, "step " + step.id + " is already executed");
  }
  const Scenario& sc = *scenario_;

  ExecutionPath path;
  std::vector<PrimitiveAction> primitives;
  if (step.targets.empty()) {
    path.step_id = step.id;
    path.step_kind = step.kind;
    primitives = checklist_primitives(step);
  } else {
    path = compile_step(step, sc.graph);
    proc.paths[step.id] = path;
    primitives = compile_primitives(path, sc.timing);
  }

  RiskAssessment a;
  a.step_id = step.id;
  a.median_s = estimate_median(primitives, sc.timing);
  a.t_avail_s = t_avail_s.value_or(sc.t_avail_for(step.id));
  const TimeEstimate estimate(a.median_s, sc.timing.sigma);
  a.p_t = p_t(estimate, a.t_avail_s);

  const double pressure = a.median_s / a.t_avail_s;
  const double pending = static_cast<double>(proc.procedure.steps.size() - proc.cursor - 1);
  const WorkloadVector workload =
      predict_workload({static_cast<double>(path.nodes.size()), pressure, pending}, sc.timing.workload);
  a.workload_score = aggregate_workload(workload);

  const auto context = make_context(step, path, a.workload_score, pressure);
  a.pifs = assess_within(assessor_, context, sc.pif_model.assessor_deadline);
  a.p_c = p_c(step.kind, a.pifs, sc.pif_model);
  a.step_hep = fuse_step_hep(a.p_t, a.p_c);
  a.confusion = false;
  a.evidence = discretize(a.p_t, a.p_c, a.workload_score, a.confusion, sc.gate.bands);
  a.action_risk = infer_action_risk(sc.gate.network, a.evidence);

  std::vector<Factor> factors;
  factors.push_back({"probability", "p_t", "", a.p_t, false});
  factors.push_back({"probability", "p_c", "", a.p_c, false});
  factors.push_back({"probability", "step_hep", "", a.step_hep, false});
  for (const auto& [name, level] : a.pifs) {
    if (level != PifLevel::Nominal) factors.push_back({"pif", name, std::string(to_string(level)), std::nullopt, false});
  }
  const auto dominant = dominant_evidence(sc.gate.network, a.evidence);
  for (const auto& [node, state] : a.evidence) {
    factors.push_back({"evidence", node, state, std::nullopt, dominant && *dominant == node});
  }
  a.decision = decide(a.action_risk, sc.gate.thresholds, std::move(factors));

  if (step.lifecycle == Lifecycle::Pending) step = mark_intended(std::move(step));

  for (auto it = state_.pending_approvals.begin(); it != state_.pending_approvals.end();) {
    if (it->second.token.step_id != step.id) {
      ++it;
      continue;
    }
    auto r = record(audit_kind::kApprovalSuperseded, step.id);
    r.detail["approval_id"] = it->first;
    audit_->append(std::move(r));
    state_.resolved_approvals[it->first] = Resolution::Superseded;
    it = state_.pending_approvals.erase(it);
  }

  auto r = record(audit_kind::kAssessment, step.id);
  r.p_t = a.p_t;
  r.p_c = a.p_c;
  r.action_risk = a.action_risk;
  r.verdict = a.decision.verdict;
  r.explanation = a.decision.explanation;
  r.detail["step_hep"] = a.step_hep;
  r.detail["median_s"] = a.median_s;
  r.detail["t_avail_s"] = a.t_avail_s;
  r.detail["workload_score"] = a.workload_score;
  r.detail["path_nodes"] = path.nodes.size();
  r.detail["approval_required"] = a.decision.approval_required;
  if (a.decision.approval_required) {
    ApprovalToken token{approval_id_for(++state_.approvals_issued), step.id, state_.clock + sc.approval_expiry_ticks};
    r.detail["approval_id"] = token.approval_id;
    r.detail["expires_at"] = token.expires_at;
    state_.pending_approvals[token.approval_id] = {token, a, state_.clock};
  }
  audit_->append(std::move(r));
  proc.latest[step.id] = a;

  if (a.decision.verdict == Verdict::Allow && sc.auto_execute_allowed) mark_step_executed(Actor::System, std::nullopt);
  return a;
}

void Runtime::mark_step_executed(Actor actor, const std::optional<std::string>& approval_id) {
  auto& step = current_step();
  step = mark_executed(std::move(step));
  auto r = record(audit_kind::kStepExecuted, step.id);
  r.actor = actor;
  if (approval_id) r.detail["approval_id"] = *approval_id;
  audit_->append(std::move(r));
}

void Runtime::submit_approval(const std::string& approval_id, ApprovalDecision decision) {
  auto it = state_.pending_approvals.find(approval_id);
  if (it == state_.pending_approvals.end()) throw Error(ErrorCode::UnknownApproval, approval_id);
  const ApprovalToken token = it->second.token;

  if (state_.clock > token.expires_at) {
    state_.pending_approvals.erase(it);
    state_.resolved_approvals[approval_id] = Resolution::Expired;
    auto r = record(audit_kind::kApprovalExpired, token.step_id);
    r.actor = Actor::Human;
    r.detail["approval_id"] = approval_id;
    r.detail["attempted"] = to_string(decision);
    r.detail["expires_at"] = token.expires_at;
    audit_->append(std::move(r));
    throw Error(ErrorCode::ExpiredApproval,
                approval_id + " expired at tick " + std::to_string(token.expires_at) + ", clock " + std::to_string(state_.clock));
  }

  // Tokens are issued only for the step under the cursor, and the cursor
  // cannot move while that step is unexecuted.
  state_.pending_approvals.erase(it);
  auto r = record(audit_kind::kApproval, token.step_id);
  r.actor = Actor::Human;
  r.operator_action = decision == ApprovalDecision::Approved ? OperatorAction::Approved : OperatorAction::Rejected;
  r.detail["approval_id"] = approval_id;
  audit_->append(std::move(r));

  if (decision == ApprovalDecision::Approved) {
    state_.resolved_approvals[approval_id] = Resolution::Approved;
    mark_step_executed(Actor::Human, approval_id);
  } else {
    state_.resolved_approvals[approval_id] = Resolution::Rejected;
  }
}

void Runtime::execute_current_step() {
  auto& proc = active();
  auto& step = current_step();
  auto latest = proc.latest.find(step.id);
  if (latest == proc.latest.end()) throw Error(ErrorCode::LifecycleViolation, "step " + step.id + " has not been evaluated");
  if (latest->second.decision.verdict != Verdict::Allow) {
    throw Error(ErrorCode::InvalidState, "step " + step.id + " is gated; it needs an approved token");
  }
  mark_step_executed(Actor::Human, std::nullopt);
}

double Runtime::current_systemic_hep() const {
  if (!state_.active_procedure) return 0.0;
  const auto& proc = *state_.active_procedure;
  std::vector<double> heps;
  for (const auto& step : proc.procedure.steps) {
    if (step.lifecycle != Lifecycle::Executed) continue;
    auto it = proc.latest.find(step.id);
    if (it != proc.latest.end()) heps.push_back(it->second.step_hep);
  }
  return systemic_hep(heps);
}

void Runtime::advance() {
  auto& proc = active();
  auto& step = current_step();
  if (step.lifecycle != Lifecycle::Executed) {
    throw Error(ErrorCode::StepNotExecuted, "step " + step.id + " is " + std::string(to_string(step.lifecycle)));
  }
  const std::string step_id = step.id;
  ++proc.cursor;
  const double systemic = current_systemic_hep();

  auto r = record(audit_kind::kAdvance, step_id);
  r.detail["cursor"] = proc.cursor;
  r.detail["systemic_hep"] = systemic;
  audit_->append(std::move(r));

  if (proc.finished()) {
    state_.mode = Mode::Completed;
    auto done = record(audit_kind::kProcedureCompleted);
    done.detail["procedure"] = proc.procedure.title;
    done.detail["executed_steps"] = proc.procedure.steps.size();
    done.detail["systemic_hep"] = systemic;
    audit_->append(std::move(done));
  }
}

nlohmann::ordered_json to_json(const RiskAssessment& a) {
  nlohmann::ordered_json j;
  j["step_id"] = a.step_id;
  j["median_s"] = a.median_s;
  j["t_avail_s"] = a.t_avail_s;
  j["p_t"] = a.p_t;
  j["p_c"] = a.p_c;
  j["step_hep"] = a.step_hep;
  j["workload_score"] = a.workload_score;
  j["confusion"] = a.confusion;
  j["pifs"] = nlohmann::ordered_json::object();
  for (const auto& [name, level] : a.pifs) j["pifs"][name] = to_string(level);
  j["evidence"] = nlohmann::ordered_json::object();
  for (const auto& [node, state] : a.evidence) j["evidence"][node] = state;
  j["action_risk"] = a.action_risk;
  j["decision"] = {{"verdict", to_string(a.decision.verdict)},
                   {"approval_required", a.decision.approval_required},
                   {"explanation", nlohmann::ordered_json::array()}};
  for (const auto& f : a.decision.explanation) j["decision"]["explanation"].push_back(to_json(f));
  return j;
}

nlohmann::ordered_json to_json(const RuntimeState& s) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(s.mode);
  j["clock"] = s.clock;
  if (s.active_event) {
    j["active_event"] = {{"event_id", s.active_event->event_id},
                         {"name", s.active_event->name},
                         {"distance", s.active_event->distance},
                         {"detected_at", s.active_event->detected_at}};
  } else {
    j["active_event"] = nullptr;
  }
  if (s.active_procedure) {
    const auto& p = *s.active_procedure;
    j["active_procedure"] = {{"event_id", p.event_id},
                             {"title", p.procedure.title},
                             {"cursor", p.cursor},
                             {"step_count", p.procedure.steps.size()}};
  } else {
    j["active_procedure"] = nullptr;
  }
  j["pending_approvals"] = nlohmann::ordered_json::array();
  for (const auto& [id, pa] : s.pending_approvals) {
    j["pending_approvals"].push_back({{"approval_id", id},
                                      {"step_id", pa.token.step_id},
                                      {"issued_at", pa.issued_at},
                                      {"expires_at", pa.token.expires_at},
                                      {"assessment", to_json(pa.assessment)}});
  }
  return j;
}

nlohmann::ordered_json procedure_view(const RuntimeState& s) {
  nlohmann::ordered_json j;
  if (!s.active_procedure) {
    j["title"] = nullptr;
    j["cursor"] = nullptr;
    j["steps"] = nlohmann::ordered_json::array();
    return j;
  }
  const auto& p = *s.active_procedure;
  j["title"] = p.procedure.title;
  j["cursor"] = p.cursor;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& step : p.procedure.steps) {
    nlohmann::ordered_json sj;
    sj["id"] = step.id;
    sj["text"] = step.text;
    sj["kind"] = to_string(step.kind);
    sj["lifecycle"] = to_string(step.lifecycle);
    auto path = p.paths.find(step.id);
    sj["path"] = path == p.paths.end() ? nlohmann::ordered_json(nullptr) : path_json(path->second);
    auto latest = p.latest.find(step.id);
    sj["assessment"] = latest == p.latest.end() ? nlohmann::ordered_json(nullptr) : to_json(latest->second);
    j["steps"].push_back(std::move(sj));
  }
  return j;
}

}  // namespace nuhf
