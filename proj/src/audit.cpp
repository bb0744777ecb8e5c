#include "nuhf/audit.hpp"

#include <sstream>

#include "nuhf/error.hpp"

namespace nuhf {

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> number_or_null(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

std::string_view to_string(OperatorAction action) {
  switch (action) {
    case OperatorAction::None: return "none";
    case OperatorAction::Approved: return "approved";
    case OperatorAction::Rejected: return "rejected";
  }
  return "none";
}

std::string_view to_string(Actor actor) { return actor == Actor::Human ? "human" : "system"; }

OperatorAction parse_operator_action(std::string_view text) {
  if (text == "none") return OperatorAction::None;
  if (text == "approved") return OperatorAction::Approved;
  if (text == "rejected") return OperatorAction::Rejected;
  throw Error(ErrorCode::Parse, "unknown operator action '" + std::string(text) + "'");
}

Actor parse_actor(std::string_view text) {
  if (text == "system") return Actor::System;
  if (text == "human") return Actor::Human;
  throw Error(ErrorCode::Parse, "unknown actor '" + std::string(text) + "'");
}

nlohmann::ordered_json to_json(const Factor& f) {
  nlohmann::ordered_json j;
  j["kind"] = f.kind;
  j["name"] = f.name;
  if (!f.level.empty()) j["level"] = f.level;
  if (f.value) j["value"] = *f.value;
  if (f.dominant) j["dominant"] = true;
  return j;
}

Factor factor_from_json(const nlohmann::json& j) {
  Factor f;
  f.kind = j.at("kind").get<std::string>();
  f.name = j.at("name").get<std::string>();
  f.level = j.value("level", std::string());
  if (j.contains("value")) f.value = j["value"].get<double>();
  f.dominant = j.value("dominant", false);
  return f;
}

nlohmann::ordered_json to_json(const AuditRecord& r) {
  nlohmann::ordered_json j;
  j["seq"] = r.seq;
  j["tick"] = r.tick;
  j["kind"] = r.kind;
  j["step_id"] = r.step_id.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.step_id);
  j["p_t"] = optional_number(r.p_t);
  j["p_c"] = optional_number(r.p_c);
  j["action_risk"] = optional_number(r.action_risk);
  j["verdict"] = r.verdict ? nlohmann::ordered_json(to_string(*r.verdict)) : nlohmann::ordered_json(nullptr);
  j["explanation"] = nlohmann::ordered_json::array();
  for (const auto& f : r.explanation) j["explanation"].push_back(to_json(f));
  j["operator_action"] = to_string(r.operator_action);
  j["actor"] = to_string(r.actor);
  j["detail"] = r.detail;
  return j;
}

AuditRecord audit_record_from_json(const nlohmann::json& j) {
  AuditRecord r;
  r.seq = j.at("seq").get<std::uint64_t>();
  r.tick = j.at("tick").get<Tick>();
  r.kind = j.at("kind").get<std::string>();
  if (!j.at("step_id").is_null()) r.step_id = j["step_id"].get<std::string>();
  r.p_t = number_or_null(j, "p_t");
  r.p_c = number_or_null(j, "p_c");
  r.action_risk = number_or_null(j, "action_risk");
  if (j.contains("verdict") && !j["verdict"].is_null()) r.verdict = parse_verdict(j["verdict"].get<std::string>());
  for (const auto& f : j.value("explanation", nlohmann::json::array())) r.explanation.push_back(factor_from_json(f));
  r.operator_action = parse_operator_action(j.at("operator_action").get<std::string>());
  r.actor = parse_actor(j.at("actor").get<std::string>());
  if (j.contains("detail")) r.detail = nlohmann::ordered_json::parse(j["detail"].dump());
  return r;
}

std::vector<AuditRecord> read_audit_log(std::string_view jsonl) {
  std::vector<AuditRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(audit_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::Parse, std::string("audit line: ") + ex.what());
    }
  }
  return out;
}

AuditLog::AuditLog(const std::filesystem::path& path) {
  sink_.emplace(path, std::ios::binary | std::ios::trunc);
  if (!*sink_) throw Error(ErrorCode::Io, "cannot write audit log " + path.string());
}

std::uint64_t AuditLog::append(AuditRecord record) {
  std::uint64_t seq = 0;
  {
    std::lock_guard lock(mutex_);
    seq = records_.size() + 1;
    record.seq = seq;
    if (sink_) {
      *sink_ << to_json(record).dump() << '\n';
      sink_->flush();
    }
    records_.push_back(std::move(record));
  }
  appended_.notify_all();
  return seq;
}

std::vector<AuditRecord> AuditLog::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<AuditRecord> AuditLog::since(std::uint64_t seq) const {
  std::lock_guard lock(mutex_);
  if (seq >= records_.size()) return {};
  return {records_.begin() + static_cast<std::ptrdiff_t>(seq), records_.end()};
}

std::uint64_t AuditLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

bool AuditLog::wait_newer(std::uint64_t seq, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return appended_.wait_for(lock, timeout, [&] { return records_.size() > seq; });
}

}  // namespace nuhf
