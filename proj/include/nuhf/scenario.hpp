#pragma once

// Scenario binding: which procedure answers which initiating event, how much
// time each step has, and the model configuration files that drive the
// timing, PIF, gate and perception stages.
//
// scenario.json (paths are relative to the config directory):
//   {
//     "id": "reactor-shutdown",
//     "graph": "iekg.json", "timing": "timing.conf", "pif_model": "pif_model.json",
//     "gate": "gate.json", "signatures": "signatures.json",
//     "procedures": {"EV-GEN-DISC": "reactor_shutdown.proc"},
//     "t_avail": {"default_s": 60, "steps": {"SN1": 30}},
//     "thresholds": {"allow_below": 0.001, "suggest_below": 0.05},
//     "approval_expiry_ticks": 600,
//     "auto_execute_allowed": true,
//     "perception": {"window_len": 50, "calibration": [{"name", "mean", "std", "slope_mean", "slope_std"}]}
//   }

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nuhf/cognitive_twin.hpp"
#include "nuhf/iekg.hpp"
#include "nuhf/perception.hpp"
#include "nuhf/procedure.hpp"
#include "nuhf/risk_agent.hpp"
#include "nuhf/safety_gate.hpp"

namespace nuhf {

struct Scenario {
  std::string id;
  IEKG graph;
  std::map<std::string, Procedure> procedures;  // event_id -> procedure
  TimingConfig timing;
  PifModelConfig pif_model = PifModelConfig::defaults();
  GateConfig gate;
  Calibration calibration;
  std::vector<EventSignature> signatures;
  double default_t_avail_s = 60.0;
  std::map<std::string, double> step_t_avail_s;
  Tick approval_expiry_ticks = 600;
  bool auto_execute_allowed = true;

  double t_avail_for(const std::string& step_id) const;
};

Scenario load_scenario(const std::filesystem::path& scenario_path, const std::filesystem::path& config_dir);

}  // namespace nuhf
