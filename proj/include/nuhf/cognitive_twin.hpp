#pragma once

// Operator timing model. Execution paths are broken into primitive operator
// actions, the median required time is the sum of their durations, and the
// required time is lognormal around that median. P_t is the probability that
// the required time exceeds the time available.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "nuhf/iekg.hpp"
#include "nuhf/procedure.hpp"

namespace nuhf {

enum class PrimitiveKind { VisualSearch, Point, Click, ReadValue, MemoryRetrieve, MentalPrep };
std::string_view to_string(PrimitiveKind kind);

struct PrimitiveAction {
  PrimitiveKind kind = PrimitiveKind::Click;
  double distance_px = 0.0;  // Point only
  double width_px = 30.0;    // Point only

  static PrimitiveAction of(PrimitiveKind kind) { return {kind, 0.0, 30.0}; }
};

/// Linear ramps for one workload dimension: base + per-node + per-pressure + per-pending-step.
struct WorkloadRamp {
  double base = 0.0;
  double per_node = 0.0;
  double per_pressure = 0.0;
  double per_pending = 0.0;
};

struct WorkloadModel {
  WorkloadRamp mental{20.0, 5.0, 40.0, 1.0};
  WorkloadRamp physical{10.0, 0.0, 0.0, 0.0};
  WorkloadRamp temporal{10.0, 0.0, 90.0, 0.0};
  WorkloadRamp performance{80.0, 1.0, 15.0, 0.0};
  WorkloadRamp effort{20.0, 5.0, 30.0, 0.0};
  WorkloadRamp frustration{5.0, 1.0, 10.0, 1.0};
};

struct TimingConfig {
  double visual_search_s = 1.10;
  double click_s = 0.20;
  double read_value_s = 1.35;
  double memory_retrieve_s = 1.20;
  double mental_prep_s = 1.35;
  double point_a_s = 0.1;
  double point_b_s_per_bit = 0.15;
  double target_width_px = 30.0;
  ScreenPoint home{960, 540};
  double sigma = 0.28;
  WorkloadModel workload;
};

/// `key = value` lines, '#' comments. Keys mirror the TimingConfig fields
/// (visual_search, click, read_value, memory_retrieve, mental_prep, point_a,
/// point_b, target_width_px, home_x, home_y, sigma) plus
/// `workload.<dimension>.<base|per_node|per_pressure|per_pending>`.
TimingConfig parse_timing_config(std::string_view text);

std::vector<PrimitiveAction> compile_primitives(const ExecutionPath& path, const TimingConfig& config = {});

double primitive_time(const PrimitiveAction& action, const TimingConfig& config);
double estimate_median(const std::vector<PrimitiveAction>& primitives, const TimingConfig& config = {});

class TimeEstimate {
 public:
  TimeEstimate(double median_s, double sigma = 0.28);

  double median_s() const { return median_s_; }
  double sigma() const { return sigma_; }
  double mu() const { return mu_; }

 private:
  double median_s_;
  double sigma_;
  double mu_;
};

double standard_normal_cdf(double z);

/// 1 - Phi((ln t_avail - mu) / sigma).
double p_t(const TimeEstimate& estimate, double t_avail_s);

struct WorkloadVector {
  double mental = 0.0;
  double physical = 0.0;
  double temporal = 0.0;
  double performance = 0.0;
  double effort = 0.0;
  double frustration = 0.0;

  std::array<double, 6> as_array() const { return {mental, physical, temporal, performance, effort, frustration}; }
  friend bool operator==(const WorkloadVector&, const WorkloadVector&) = default;
};

/// TLX-style mean with the performance dimension inverted.
double aggregate_workload(const WorkloadVector& w);

struct RunContext {
  double path_length = 0.0;
  double time_pressure_ratio = 0.0;
  double pending_steps = 0.0;
};

WorkloadVector predict_workload(const RunContext& context, const WorkloadModel& model = {});

}  // namespace nuhf
