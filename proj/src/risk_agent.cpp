#include "nuhf/risk_agent.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include <json.hpp>

#include "nuhf/error.hpp"

namespace nuhf {

namespace {

constexpr std::pair<CognitiveFunction, std::string_view> kFunctions[] = {
    {CognitiveFunction::Detection, "detection"},
    {CognitiveFunction::Understanding, "understanding"},
    {CognitiveFunction::DecisionMaking, "decision_making"},
    {CognitiveFunction::ActionExecution, "action_execution"},
};

PifLevel level_at(double value, double moderate, double high) {
  if (value >= high) return PifLevel::High;
  if (value >= moderate) return PifLevel::Moderate;
  return PifLevel::Nominal;
}

void validate(const CognitiveFunctionModel& m) {
  const auto name = std::string(to_string(m.function));
  if (!(m.base_hep > 0 && m.base_hep < 1)) throw Error(ErrorCode::InvalidArgument, name + ": base HEP outside (0, 1)");
  for (const auto& [pif_name, levels] : m.multipliers) {
    double moderate = 1.0;
    for (const auto& [level, factor] : levels) {
      if (level == PifLevel::Nominal && factor != 1.0) {
        throw Error(ErrorCode::InvalidArgument, name + "/" + pif_name + ": nominal multiplier must be 1");
      }
      if (factor < 1.0) throw Error(ErrorCode::InvalidArgument, name + "/" + pif_name + ": multiplier below 1");
      if (level == PifLevel::Moderate) moderate = factor;
    }
    auto high = levels.find(PifLevel::High);
    if (high != levels.end() && high->second < moderate) {
      throw Error(ErrorCode::InvalidArgument, name + "/" + pif_name + ": high multiplier below moderate");
    }
  }
}

}  // namespace

std::string_view to_string(PifLevel level) {
  switch (level) {
    case PifLevel::Nominal: return "nominal";
    case PifLevel::Moderate: return "moderate";
    case PifLevel::High: return "high";
  }
  return "nominal";
}

std::string_view to_string(CognitiveFunction function) {
  for (const auto& [f, name] : kFunctions)
    if (f == function) return name;
  return "detection";
}

PifLevel parse_pif_level(std::string_view text) {
  if (text == "nominal") return PifLevel::Nominal;
  if (text == "moderate") return PifLevel::Moderate;
  if (text == "high") return PifLevel::High;
  throw Error(ErrorCode::Parse, "unknown PIF level '" + std::string(text) + "'");
}

CognitiveFunction parse_cognitive_function(std::string_view text) {
  for (const auto& [f, name] : kFunctions)
    if (name == text) return f;
  throw Error(ErrorCode::Parse, "unknown cognitive function '" + std::string(text) + "'");
}

const std::vector<std::string>& default_pif_names() {
  static const std::vector<std::string> names{
      std::string(pif::kInformationCompleteness), std::string(pif::kHsiComplexity), std::string(pif::kTimePressure),
      std::string(pif::kTaskComplexity), std::string(pif::kWorkload)};
  return names;
}

double CognitiveFunctionModel::multiplier(std::string_view pif_name, PifLevel level) const {
  if (level == PifLevel::Nominal) return 1.0;
  auto it = multipliers.find(pif_name);
  if (it == multipliers.end()) return 1.0;
  auto f = it->second.find(level);
  return f == it->second.end() ? 1.0 : f->second;
}

PifModelConfig PifModelConfig::defaults() {
  PifModelConfig config;
  const std::pair<CognitiveFunction, double> bases[] = {
      {CognitiveFunction::Detection, 1e-3},
      {CognitiveFunction::Understanding, 2e-3},
      {CognitiveFunction::DecisionMaking, 2e-3},
      {CognitiveFunction::ActionExecution, 1e-3},
  };
  for (const auto& [function, base] : bases) {
    CognitiveFunctionModel m{function, base, {}};
    for (const auto& name : config.pifs) m.multipliers[name] = {{PifLevel::Moderate, 3.0}, {PifLevel::High, 10.0}};
    config.functions[function] = std::move(m);
  }
  return config;
}

PifModelConfig parse_pif_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("PIF model: ") + ex.what());
  }
  PifModelConfig config;
  try {
    if (doc.contains("pifs")) config.pifs = doc["pifs"].get<std::vector<std::string>>();
    std::map<PifLevel, double> default_multipliers{{PifLevel::Moderate, 3.0}, {PifLevel::High, 10.0}};
    if (doc.contains("default_multipliers")) {
      default_multipliers.clear();
      for (const auto& [level, factor] : doc["default_multipliers"].items()) {
        default_multipliers[parse_pif_level(level)] = factor.get<double>();
      }
    }
    for (const auto& [name, spec] : doc.at("functions").items()) {
      CognitiveFunctionModel m;
      m.function = parse_cognitive_function(name);
      m.base_hep = spec.at("base_hep").get<double>();
      for (const auto& pif_name : config.pifs) m.multipliers[pif_name] = default_multipliers;
      if (spec.contains("multipliers")) {
        for (const auto& [pif_name, levels] : spec["multipliers"].items()) {
          auto& row = m.multipliers[pif_name];
          for (const auto& [level, factor] : levels.items()) row[parse_pif_level(level)] = factor.get<double>();
        }
      }
      validate(m);
      config.functions[m.function] = std::move(m);
    }
    if (doc.contains("assessor")) {
      const auto& a = doc["assessor"];
      auto& t = config.thresholds;
      t.hsi_moderate_nodes = a.value("hsi_moderate_nodes", t.hsi_moderate_nodes);
      t.hsi_high_nodes = a.value("hsi_high_nodes", t.hsi_high_nodes);
      t.workload_moderate = a.value("workload_moderate", t.workload_moderate);
      t.workload_high = a.value("workload_high", t.workload_high);
      t.time_pressure_moderate = a.value("time_pressure_moderate", t.time_pressure_moderate);
      t.time_pressure_high = a.value("time_pressure_high", t.time_pressure_high);
      t.flowchart_moderate_nodes = a.value("flowchart_moderate_nodes", t.flowchart_moderate_nodes);
      t.flowchart_high_nodes = a.value("flowchart_high_nodes", t.flowchart_high_nodes);
      config.assessor_deadline = std::chrono::milliseconds(a.value("deadline_ms", 150));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("PIF model: ") + ex.what());
  }
  return config;
}

std::vector<CognitiveFunction> engaged_functions(StepKind kind) {
  using F = CognitiveFunction;
  switch (kind) {
    case StepKind::ParameterCheck:
    case StepKind::Checklist: return {F::Detection, F::Understanding};
    case StepKind::ScreenNavigation:
    case StepKind::TopLeftToggle: return {F::Detection, F::ActionExecution};
    case StepKind::FlowchartExecution: return {F::Detection, F::Understanding, F::DecisionMaking, F::ActionExecution};
  }
  return {};
}

AssessmentContext make_context(const ProcedureStep& step, const ExecutionPath& path, double workload_score,
                               double time_pressure_ratio) {
  AssessmentContext c;
  c.step_id = step.id;
  c.step_kind = step.kind;
  c.path_nodes = path.nodes.size();
  c.nodes_without_coords = static_cast<std::size_t>(
      std::count_if(path.nodes.begin(), path.nodes.end(), [](const PathNode& n) { return !n.coords; }));
  c.workload_score = workload_score;
  c.time_pressure_ratio = time_pressure_ratio;
  return c;
}

PIFState assess_pifs(const AssessmentContext& c, const AssessorThresholds& t) {
  PIFState state;
  const double nodes = static_cast<double>(c.path_nodes);
  state[std::string(pif::kHsiComplexity)] = level_at(nodes, t.hsi_moderate_nodes, t.hsi_high_nodes);
  state[std::string(pif::kWorkload)] = level_at(c.workload_score, t.workload_moderate, t.workload_high);
  state[std::string(pif::kTimePressure)] = level_at(c.time_pressure_ratio, t.time_pressure_moderate, t.time_pressure_high);
  state[std::string(pif::kTaskComplexity)] =
      c.step_kind == StepKind::FlowchartExecution ? level_at(nodes, t.flowchart_moderate_nodes, t.flowchart_high_nodes)
                                                  : PifLevel::Nominal;
  // Unregistered positions mean the operator must find the control unaided.
  state[std::string(pif::kInformationCompleteness)] =
      c.nodes_without_coords > 0 ? PifLevel::Moderate : PifLevel::Nominal;
  return state;
}

PIFState assess_within(std::shared_ptr<const PifAssessor> assessor, const AssessmentContext& context,
                       std::chrono::milliseconds deadline) {
  auto promise = std::make_shared<std::promise<PIFState>>();
  auto result = promise->get_future();
  std::thread([assessor, context, promise] {
    try {
      promise->set_value(assessor->assess(context));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();
  if (result.wait_for(deadline) != std::future_status::ready) {
    throw Error(ErrorCode::AssessorTimeout,
                "no PIF assessment for step " + context.step_id + " within " + std::to_string(deadline.count()) + " ms");
  }
  return result.get();
}

std::vector<FunctionHep> function_heps(const std::vector<CognitiveFunction>& engaged, const PIFState& state,
                                       const PifModelConfig& model) {
  for (const auto& name : model.pifs) {
    if (!state.count(name)) throw Error(ErrorCode::InvalidArgument, "PIF state lacks '" + name + "'");
  }
  std::vector<FunctionHep> out;
  for (CognitiveFunction f : engaged) {
    auto it = model.functions.find(f);
    if (it == model.functions.end()) {
      throw Error(ErrorCode::MissingConfig, "no model for engaged function " + std::string(to_string(f)));
    }
    double h = it->second.base_hep;
    for (const auto& [name, level] : state) h *= it->second.multiplier(name, level);
    out.push_back({f, std::min(h, 1.0)});
  }
  return out;
}

double p_c(const std::vector<CognitiveFunction>& engaged, const PIFState& state, const PifModelConfig& model) {
  double survive = 1.0;
  for (const auto& fh : function_heps(engaged, state, model)) survive *= 1.0 - fh.hep;
  return std::clamp(1.0 - survive, 0.0, 1.0);
}

}  // namespace nuhf
