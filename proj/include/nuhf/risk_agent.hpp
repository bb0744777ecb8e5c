#pragma once

// Contextual failure probability P_c. A step engages a set of macro-cognitive
// functions; each function's base HEP is scaled by the multipliers of the
// current performance influencing factor (PIF) levels, and the engaged
// functions fail independently.

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nuhf/procedure.hpp"

namespace nuhf {

enum class PifLevel { Nominal = 0, Moderate = 1, High = 2 };
enum class CognitiveFunction { Detection, Understanding, DecisionMaking, ActionExecution };

std::string_view to_string(PifLevel level);
std::string_view to_string(CognitiveFunction function);
PifLevel parse_pif_level(std::string_view text);
CognitiveFunction parse_cognitive_function(std::string_view text);

namespace pif {
inline constexpr std::string_view kInformationCompleteness = "information_completeness";
inline constexpr std::string_view kHsiComplexity = "hsi_complexity";
inline constexpr std::string_view kTimePressure = "time_pressure";
inline constexpr std::string_view kTaskComplexity = "task_complexity";
inline constexpr std::string_view kWorkload = "workload";
}  // namespace pif

const std::vector<std::string>& default_pif_names();

using PIFState = std::map<std::string, PifLevel, std::less<>>;

struct CognitiveFunctionModel {
  CognitiveFunction function = CognitiveFunction::Detection;
  double base_hep = 1e-3;
  // (PIF, level) -> factor. Nominal is always 1 and is not stored.
  std::map<std::string, std::map<PifLevel, double>, std::less<>> multipliers;

  double multiplier(std::string_view pif, PifLevel level) const;
};

/// Thresholds of the rule-based assessor.
struct AssessorThresholds {
  int hsi_moderate_nodes = 4;
  int hsi_high_nodes = 8;
  double workload_moderate = 40.0;
  double workload_high = 50.0;
  double time_pressure_moderate = 0.5;
  double time_pressure_high = 0.8;
  int flowchart_moderate_nodes = 4;
  int flowchart_high_nodes = 8;
};

struct PifModelConfig {
  std::vector<std::string> pifs = default_pif_names();
  std::map<CognitiveFunction, CognitiveFunctionModel> functions;
  AssessorThresholds thresholds;
  std::chrono::milliseconds assessor_deadline{150};

  /// Base HEPs 1e-3 / 2e-3 / 2e-3 / 1e-3; every PIF multiplies by 3 at
  /// moderate and 10 at high.
  static PifModelConfig defaults();
};

/// JSON document; see fixtures/shutdown/pif_model.json for the layout.
PifModelConfig parse_pif_model(std::string_view text);

std::vector<CognitiveFunction> engaged_functions(StepKind kind);

struct AssessmentContext {
  std::string step_id;
  StepKind step_kind = StepKind::ScreenNavigation;
  std::size_t path_nodes = 0;
  std::size_t nodes_without_coords = 0;
  double workload_score = 0.0;
  double time_pressure_ratio = 0.0;
};

AssessmentContext make_context(const ProcedureStep& step, const ExecutionPath& path, double workload_score,
                               double time_pressure_ratio);

/// Deterministic default assessor.
PIFState assess_pifs(const AssessmentContext& context, const AssessorThresholds& thresholds = {});

/// Slot for an alternative (e.g. language-model based) assessor. Implementations
/// must return a level for every configured PIF.
class PifAssessor {
 public:
  virtual ~PifAssessor() = default;
  virtual PIFState assess(const AssessmentContext& context) const = 0;
};

class RuleBasedAssessor final : public PifAssessor {
 public:
  explicit RuleBasedAssessor(AssessorThresholds thresholds = {}) : thresholds_(thresholds) {}
  PIFState assess(const AssessmentContext& context) const override { return assess_pifs(context, thresholds_); }

 private:
  AssessorThresholds thresholds_;
};

/// Runs `assessor` and waits at most `deadline`; throws AssessorTimeout when
/// it does not answer in time.
PIFState assess_within(std::shared_ptr<const PifAssessor> assessor, const AssessmentContext& context,
                       std::chrono::milliseconds deadline);

struct FunctionHep {
  CognitiveFunction function;
  double hep;
};

/// min(base * prod multipliers, 1) for every engaged function.
std::vector<FunctionHep> function_heps(const std::vector<CognitiveFunction>& engaged, const PIFState& state,
                                       const PifModelConfig& model);

/// 1 - prod(1 - h_f) over the engaged functions.
double p_c(const std::vector<CognitiveFunction>& engaged, const PIFState& state, const PifModelConfig& model);

inline double p_c(StepKind kind, const PIFState& state, const PifModelConfig& model) {
  return p_c(engaged_functions(kind), state, model);
}

}  // namespace nuhf
