#include "nuhf/scenario.hpp"

#include <json.hpp>

#include "nuhf/detail/text_util.hpp"
#include "nuhf/error.hpp"

namespace nuhf {

double Scenario::t_avail_for(const std::string& step_id) const {
  auto it = step_t_avail_s.find(step_id);
  return it == step_t_avail_s.end() ? default_t_avail_s : it->second;
}

Scenario load_scenario(const std::filesystem::path& scenario_path, const std::filesystem::path& config_dir) {
  const std::string text = detail::read_file(scenario_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, scenario_path.string() + ": " + ex.what());
  }

  auto file = [&](const char* key) -> std::filesystem::path {
    if (!doc.contains(key)) throw Error(ErrorCode::MissingConfig, scenario_path.string() + " lacks '" + key + "'");
    return config_dir / doc[key].get<std::string>();
  };
  auto in_context = [](const std::filesystem::path& path, auto&& parse) {
    try {
      return parse(detail::read_file(path));
    } catch (const Error& ex) {
      throw Error(ex.code(), path.string() + ": " + ex.detail());
    }
  };

  Scenario s;
  try {
    s.id = doc.value("id", scenario_path.stem().string());
    s.graph = in_context(file("graph"), [](const std::string& t) { return IEKG::import_json(t); });
    s.timing = in_context(file("timing"), [](const std::string& t) { return parse_timing_config(t); });
    s.pif_model = in_context(file("pif_model"), [](const std::string& t) { return parse_pif_model(t); });
    s.gate = in_context(file("gate"), [](const std::string& t) { return parse_gate_config(t); });
    s.signatures = in_context(file("signatures"), [](const std::string& t) { return parse_signatures(t); });

    for (const auto& [event_id, proc_file] : doc.at("procedures").items()) {
      s.procedures[event_id] = in_context(config_dir / proc_file.get<std::string>(),
                                          [](const std::string& t) { return parse_procedure(t); });
    }

    if (doc.contains("t_avail")) {
      const auto& t = doc["t_avail"];
      s.default_t_avail_s = t.value("default_s", s.default_t_avail_s);
      if (t.contains("steps")) s.step_t_avail_s = t["steps"].get<std::map<std::string, double>>();
    }
    if (!(s.default_t_avail_s > 0)) throw Error(ErrorCode::InvalidArgument, "default time available must be positive");
    for (const auto& [step, t] : s.step_t_avail_s) {
      if (!(t > 0)) throw Error(ErrorCode::InvalidArgument, "time available for " + step + " must be positive");
    }

    if (doc.contains("thresholds")) {
      s.gate.thresholds.allow_below = doc["thresholds"].value("allow_below", s.gate.thresholds.allow_below);
      s.gate.thresholds.suggest_below = doc["thresholds"].value("suggest_below", s.gate.thresholds.suggest_below);
      s.gate.thresholds.validate();
    }
    s.gate.bands.workload_high = s.pif_model.thresholds.workload_high;
    s.approval_expiry_ticks = doc.value("approval_expiry_ticks", s.approval_expiry_ticks);
    s.auto_execute_allowed = doc.value("auto_execute_allowed", s.auto_execute_allowed);

    const auto& p = doc.at("perception");
    s.calibration.window_len = p.value("window_len", s.calibration.window_len);
    for (const auto& c : p.at("calibration")) {
      s.calibration.parameters.push_back({c.at("name").get<std::string>(), c.at("mean").get<double>(),
                                          c.at("std").get<double>(), c.value("slope_mean", 0.0),
                                          c.at("slope_std").get<double>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, scenario_path.string() + ": " + ex.what());
  }

  for (const auto& sig : s.signatures) {
    if (sig.centroid.size() != s.calibration.feature_dim()) {
      throw Error(ErrorCode::DimensionMismatch, sig.event_id + " centroid has " + std::to_string(sig.centroid.size()) +
                                                    " dimensions, calibration yields " +
                                                    std::to_string(s.calibration.feature_dim()));
    }
  }
  return s;
}

}  // namespace nuhf
