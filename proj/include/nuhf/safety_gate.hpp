#pragma once

// Governance gate: a small discrete Bayesian network turns discretised
// evidence (time pressure, cognitive load, PIF severity, confusion) into an
// Action Risk Probability, which thresholds map to Allow / Suggest / Block.
// Suggest and Block require operator approval before the step executes.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nuhf/risk_agent.hpp"

namespace nuhf {

struct BayesNode {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  // One distribution per parent-state combination. Rows are ordered as an
  // odometer over `parents` with the last parent varying fastest.
  std::vector<std::vector<double>> cpt;
};

using Evidence = std::map<std::string, std::string, std::less<>>;

class BayesNetwork {
 public:
  BayesNetwork() = default;

  /// Validates names, parent references, acyclicity, CPT shape and row sums
  /// (within 1e-9). Rows are renormalised to absorb rounding.
  static BayesNetwork build(std::vector<BayesNode> nodes);

  const std::vector<BayesNode>& nodes() const { return nodes_; }
  const BayesNode& node(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  std::size_t state_index(std::size_t node, std::string_view state) const;

  /// Exact posterior over the states of `query` given `evidence`, by
  /// enumerating every joint assignment of the unobserved nodes.
  std::vector<double> posterior(std::string_view query, const Evidence& evidence) const;
  double probability(std::string_view query, std::string_view state, const Evidence& evidence) const;

 private:
  double conditional(std::size_t node, const std::vector<std::size_t>& assignment) const;
  double enumerate(std::size_t depth, std::vector<std::size_t>& assignment,
                   const std::vector<std::optional<std::size_t>>& observed) const;

  std::vector<BayesNode> nodes_;
  std::vector<std::vector<std::size_t>> parent_index_;
  std::vector<std::size_t> order_;  // topological
};

namespace bn {
inline constexpr std::string_view kTimePressure = "TimePressure";
inline constexpr std::string_view kCognitiveLoad = "CognitiveLoad";
inline constexpr std::string_view kPifSeverity = "PIFSeverity";
inline constexpr std::string_view kConfusion = "Confusion";
inline constexpr std::string_view kActionRisk = "ActionRisk";
}  // namespace bn

struct GateThresholds {
  double allow_below = 1e-3;
  double suggest_below = 5e-2;

  void validate() const;
};

/// Maps continuous agent outputs onto evidence states of the default topology.
struct EvidenceBands {
  double p_t_moderate = 0.01;
  double p_t_high = 0.1;
  double p_c_moderate = 0.01;
  double p_c_high = 0.05;
  double workload_high = 50.0;
};

struct GateConfig {
  BayesNetwork network;
  GateThresholds thresholds;
  EvidenceBands bands;
};

/// JSON: {"nodes":[{"name","states","parents","cpt"}], "thresholds":{...}, "evidence":{...}}.
GateConfig parse_gate_config(std::string_view text);
BayesNetwork build_network(std::string_view json_text);

Evidence discretize(double p_t, double p_c, double workload_score, bool confusion, const EvidenceBands& bands);

/// P(ActionRisk = high | evidence).
double infer_action_risk(const BayesNetwork& network, const Evidence& evidence);

enum class Verdict { Allow = 0, Suggest = 1, Block = 2 };
std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct Factor {
  std::string kind;  // "risk", "probability", "pif", "evidence"
  std::string name;
  std::string level;  // categorical value, empty for numeric factors
  std::optional<double> value;
  bool dominant = false;

  friend bool operator==(const Factor&, const Factor&) = default;
};

struct GateDecision {
  Verdict verdict = Verdict::Allow;
  std::vector<Factor> explanation;
  bool approval_required = false;
};

/// The explanation is the action-risk factor followed by `context`, so it is
/// never empty.
GateDecision decide(double action_risk, const GateThresholds& thresholds, std::vector<Factor> context = {});

/// The observed node whose reset to its first (baseline) state lowers the
/// action risk the most; empty when every observed node is at baseline.
std::optional<std::string> dominant_evidence(const BayesNetwork& network, const Evidence& evidence);

double fuse_step_hep(double p_t, double p_c);
double systemic_hep(const std::vector<double>& step_heps);

struct RiskAssessment {
  std::string step_id;
  double median_s = 0.0;
  double t_avail_s = 0.0;
  double p_t = 0.0;
  double p_c = 0.0;
  double step_hep = 0.0;
  double workload_score = 0.0;
  bool confusion = false;
  PIFState pifs;
  Evidence evidence;
  double action_risk = 0.0;
  GateDecision decision;
};

}  // namespace nuhf
