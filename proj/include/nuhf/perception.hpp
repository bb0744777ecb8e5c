#pragma once

// Telemetry replay, windowed features and initiating-event detection.
//
// Frames carry TIME in 10 ms ticks. A window of frames is summarised per
// parameter as (mean, least-squares slope per second), both z-scored against
// nominal calibration statistics; detection is nearest-centroid with a
// per-event admissible distance.

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nuhf {

using Tick = std::int64_t;
inline constexpr double kSecondsPerTick = 0.01;

struct TelemetryFrame {
  Tick time = 0;
  std::vector<double> values;  // aligned with TelemetryStream::columns
};

struct TelemetryStream {
  std::vector<std::string> columns;  // parameter names, TIME excluded
  std::vector<TelemetryFrame> frames;

  std::size_t column(std::string_view name) const;
  double value(std::size_t frame, std::string_view name) const;
};

/// Header row names the parameters; the first column is TIME. Any column
/// listed in `required` must be present.
TelemetryStream ingest(std::string_view csv_text, const std::vector<std::string>& required = {});

struct ParameterStats {
  std::string name;
  double mean = 0.0;
  double std = 1.0;
  double slope_mean = 0.0;
  double slope_std = 1.0;
};

struct Calibration {
  std::size_t window_len = 50;
  std::vector<ParameterStats> parameters;

  std::vector<std::string> names() const;
  std::size_t feature_dim() const { return parameters.size() * 2; }
};

/// Least-squares slope of ys over xs.
double least_squares_slope(std::span<const double> xs, std::span<const double> ys);

class FeatureExtractor {
 public:
  FeatureExtractor(Calibration calibration, const std::vector<std::string>& columns);

  const Calibration& calibration() const { return calibration_; }

  /// Features of exactly these frames: [mean_z, slope_z] per calibrated
  /// parameter, in calibration order.
  std::vector<double> features(std::span<const TelemetryFrame> window) const;

 private:
  Calibration calibration_;
  std::vector<std::size_t> column_of_;
};

/// Features of the last `window_len` frames of `stream`.
std::vector<double> window_features(const TelemetryStream& stream, std::size_t window_len, const Calibration& calibration);

struct EventSignature {
  std::string event_id;
  std::string name;
  std::vector<double> centroid;
  double threshold = 0.0;
};

struct EventLabel {
  std::string event_id;
  std::string name;
  double distance = 0.0;
  Tick detected_at = 0;
};

std::vector<EventSignature> parse_signatures(std::string_view json_text);

/// Nearest centroid; absent when that centroid is farther than its
/// threshold. Equidistant signatures resolve to the smaller event_id.
std::optional<EventLabel> detect(std::span<const double> features, const std::vector<EventSignature>& signatures);

class EventDetector {
 public:
  virtual ~EventDetector() = default;
  virtual std::optional<EventLabel> detect(std::span<const double> features) const = 0;
};

class CentroidDetector final : public EventDetector {
 public:
  explicit CentroidDetector(std::vector<EventSignature> signatures);
  std::optional<EventLabel> detect(std::span<const double> features) const override {
    return nuhf::detect(features, signatures_);
  }
  const std::vector<EventSignature>& signatures() const { return signatures_; }

 private:
  std::vector<EventSignature> signatures_;
};

/// Sliding-window detector over a frame stream.
class PerceptionPipeline {
 public:
  PerceptionPipeline(FeatureExtractor extractor, std::shared_ptr<const EventDetector> detector);

  /// Adds a frame; once a full window is buffered, runs the detector and
  /// stamps any label with the frame's tick.
  std::optional<EventLabel> push(const TelemetryFrame& frame);
  void reset() { window_.clear(); }

 private:
  FeatureExtractor extractor_;
  std::shared_ptr<const EventDetector> detector_;
  std::deque<TelemetryFrame> window_;
  std::vector<TelemetryFrame> scratch_;
};

}  // namespace nuhf
