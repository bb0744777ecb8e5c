#include "nuhf/cognitive_twin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nuhf/detail/text_util.hpp"
#include "nuhf/error.hpp"

namespace nuhf {

namespace {

void check_ramp(const WorkloadRamp& r, std::string_view name) {
  if (r.per_node < 0 || r.per_pressure < 0 || r.per_pending < 0) {
    throw Error(ErrorCode::InvalidArgument, "workload ramp '" + std::string(name) + "' must be non-decreasing");
  }
}

double ramp(const WorkloadRamp& r, const RunContext& c) {
  const double v = r.base + r.per_node * c.path_length + r.per_pressure * c.time_pressure_ratio +
                   r.per_pending * c.pending_steps;
  return std::clamp(v, 0.0, 100.0);
}

WorkloadRamp* ramp_by_name(WorkloadModel& m, std::string_view name) {
  if (name == "mental") return &m.mental;
  if (name == "physical") return &m.physical;
  if (name == "temporal") return &m.temporal;
  if (name == "performance") return &m.performance;
  if (name == "effort") return &m.effort;
  if (name == "frustration") return &m.frustration;
  return nullptr;
}

}  // namespace

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::VisualSearch: return "visual_search";
    case PrimitiveKind::Point: return "point";
    case PrimitiveKind::Click: return "click";
    case PrimitiveKind::ReadValue: return "read_value";
    case PrimitiveKind::MemoryRetrieve: return "memory_retrieve";
    case PrimitiveKind::MentalPrep: return "mental_prep";
  }
  return "click";
}

TimingConfig parse_timing_config(std::string_view text) {
  TimingConfig config;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Parse, "timing config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const double value = detail::parse_number(line.substr(eq + 1));

    if (key == "visual_search") config.visual_search_s = value;
    else if (key == "click") config.click_s = value;
    else if (key == "read_value") config.read_value_s = value;
    else if (key == "memory_retrieve") config.memory_retrieve_s = value;
    else if (key == "mental_prep") config.mental_prep_s = value;
    else if (key == "point_a") config.point_a_s = value;
    else if (key == "point_b") config.point_b_s_per_bit = value;
    else if (key == "target_width_px") config.target_width_px = value;
    else if (key == "home_x") config.home.x = static_cast<int>(value);
    else if (key == "home_y") config.home.y = static_cast<int>(value);
    else if (key == "sigma") config.sigma = value;
    else if (key.rfind("workload.", 0) == 0) {
      const auto rest = key.substr(9);
      const auto dot = rest.find('.');
      WorkloadRamp* r = dot == std::string::npos ? nullptr : ramp_by_name(config.workload, rest.substr(0, dot));
      const auto field = dot == std::string::npos ? std::string() : rest.substr(dot + 1);
      if (!r) throw Error(ErrorCode::Parse, "unknown timing key '" + key + "'");
      if (field == "base") r->base = value;
      else if (field == "per_node") r->per_node = value;
      else if (field == "per_pressure") r->per_pressure = value;
      else if (field == "per_pending") r->per_pending = value;
      else throw Error(ErrorCode::Parse, "unknown timing key '" + key + "'");
    } else {
      throw Error(ErrorCode::Parse, "unknown timing key '" + key + "'");
    }
  }
  if (config.sigma <= 0) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  if (config.target_width_px <= 0) throw Error(ErrorCode::InvalidArgument, "target width must be positive");
  for (const auto& [name, r] : {std::pair{"mental", config.workload.mental}, {"physical", config.workload.physical},
                                {"temporal", config.workload.temporal}, {"performance", config.workload.performance},
                                {"effort", config.workload.effort}, {"frustration", config.workload.frustration}}) {
    check_ramp(r, name);
  }
  return config;
}

std::vector<PrimitiveAction> compile_primitives(const ExecutionPath& path, const TimingConfig& config) {
  if (path.nodes.empty()) throw Error(ErrorCode::InvalidArgument, "empty execution path for step " + path.step_id);
  std::vector<PrimitiveAction> out;
  out.reserve(1 + path.nodes.size() * 4);
  out.push_back(PrimitiveAction::of(PrimitiveKind::MentalPrep));

  ScreenPoint cursor = config.home;
  for (const auto& node : path.nodes) {
    double distance = 0.0;
    if (node.coords) {
      distance = std::hypot(static_cast<double>(node.coords->x - cursor.x), static_cast<double>(node.coords->y - cursor.y));
      cursor = *node.coords;
    }
    out.push_back(PrimitiveAction::of(PrimitiveKind::VisualSearch));
    out.push_back({PrimitiveKind::Point, distance, config.target_width_px});
    out.push_back(PrimitiveAction::of(PrimitiveKind::Click));
    if (path.step_kind == StepKind::ParameterCheck) out.push_back(PrimitiveAction::of(PrimitiveKind::ReadValue));
  }
  return out;
}

double primitive_time(const PrimitiveAction& action, const TimingConfig& config) {
  switch (action.kind) {
    case PrimitiveKind::VisualSearch: return config.visual_search_s;
    case PrimitiveKind::Click: return config.click_s;
    case PrimitiveKind::ReadValue: return config.read_value_s;
    case PrimitiveKind::MemoryRetrieve: return config.memory_retrieve_s;
    case PrimitiveKind::MentalPrep: return config.mental_prep_s;
    case PrimitiveKind::Point:
      if (action.distance_px < 0 || action.width_px <= 0) {
        throw Error(ErrorCode::InvalidArgument, "point needs distance >= 0 and width > 0");
      }
      return config.point_a_s + config.point_b_s_per_bit * std::log2(action.distance_px / action.width_px + 1.0);
  }
  return 0.0;
}

double estimate_median(const std::vector<PrimitiveAction>& primitives, const TimingConfig& config) {
  double total = 0.0;
  for (const auto& p : primitives) total += primitive_time(p, config);
  return total;
}

TimeEstimate::TimeEstimate(double median_s, double sigma) : median_s_(median_s), sigma_(sigma), mu_(0.0) {
  if (!(median_s > 0)) throw Error(ErrorCode::InvalidArgument, "median time must be positive");
  if (!(sigma > 0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  mu_ = std::log(median_s);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double p_t(const TimeEstimate& estimate, double t_avail_s) {
  if (!(t_avail_s > 0)) throw Error(ErrorCode::InvalidArgument, "time available must be positive");
  const double z = (std::log(t_avail_s) - estimate.mu()) / estimate.sigma();
  // Upper tail directly, so small P_t keeps its relative precision.
  return std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

double aggregate_workload(const WorkloadVector& w) {
  for (double v : w.as_array()) {
    if (v < 0 || v > 100) throw Error(ErrorCode::InvalidArgument, "workload components must lie in [0, 100]");
  }
  return (w.mental + w.physical + w.temporal + (100.0 - w.performance) + w.effort + w.frustration) / 6.0;
}

WorkloadVector predict_workload(const RunContext& context, const WorkloadModel& model) {
  if (context.path_length < 0 || context.time_pressure_ratio < 0 || context.pending_steps < 0) {
    throw Error(ErrorCode::InvalidArgument, "run context inputs must be non-negative");
  }
  return {ramp(model.mental, context),      ramp(model.physical, context), ramp(model.temporal, context),
          ramp(model.performance, context), ramp(model.effort, context),   ramp(model.frustration, context)};
}

}  // namespace nuhf
