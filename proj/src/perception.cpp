#include "nuhf/perception.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "nuhf/detail/text_util.hpp"
#include "nuhf/error.hpp"

namespace nuhf {

std::size_t TelemetryStream::column(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::MissingColumn, std::string(name));
  return static_cast<std::size_t>(it - columns.begin());
}

double TelemetryStream::value(std::size_t frame, std::string_view name) const {
  return frames.at(frame).values[column(name)];
}

TelemetryStream ingest(std::string_view csv_text, const std::vector<std::string>& required) {
  const auto rows = detail::parse_csv(csv_text);
  if (rows.empty()) throw Error(ErrorCode::MissingColumn, "telemetry has no header row");
  const auto& header = rows.front();
  if (header.empty() || header.front().rfind("TIME", 0) != 0) {
    throw Error(ErrorCode::MissingColumn, "first column must be TIME");
  }

  TelemetryStream stream;
  stream.columns.assign(header.begin() + 1, header.end());
  for (const auto& name : required) stream.column(name);

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw Error(ErrorCode::MissingColumn, "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                                " fields, header has " + std::to_string(header.size()));
    }
    TelemetryFrame frame;
    const double t = detail::parse_number(row[0]);
    if (t != std::floor(t)) throw Error(ErrorCode::UnparseableNumber, "TIME '" + row[0] + "' is not a whole tick");
    frame.time = static_cast<Tick>(t);
    if (!stream.frames.empty() && frame.time <= stream.frames.back().time) {
      throw Error(ErrorCode::NonMonotonicTime, "TIME " + row[0] + " at row " + std::to_string(r) + " follows " +
                                                   std::to_string(stream.frames.back().time));
    }
    frame.values.reserve(row.size() - 1);
    for (std::size_t c = 1; c < row.size(); ++c) frame.values.push_back(detail::parse_number(row[c]));
    stream.frames.push_back(std::move(frame));
  }
  return stream;
}

std::vector<std::string> Calibration::names() const {
  std::vector<std::string> out;
  for (const auto& p : parameters) out.push_back(p.name);
  return out;
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw Error(ErrorCode::InsufficientFrames, "slope needs two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx == 0 ? 0.0 : sxy / sxx;
}

FeatureExtractor::FeatureExtractor(Calibration calibration, const std::vector<std::string>& columns)
    : calibration_(std::move(calibration)) {
  if (calibration_.window_len < 2) throw Error(ErrorCode::InsufficientFrames, "window length must be at least 2");
  for (const auto& p : calibration_.parameters) {
    if (!(p.std > 0) || !(p.slope_std > 0)) {
      throw Error(ErrorCode::InvalidArgument, "calibration for " + p.name + " needs positive deviations");
    }
    auto it = std::find(columns.begin(), columns.end(), p.name);
    if (it == columns.end()) throw Error(ErrorCode::MissingColumn, p.name);
    column_of_.push_back(static_cast<std::size_t>(it - columns.begin()));
  }
}

std::vector<double> FeatureExtractor::features(std::span<const TelemetryFrame> window) const {
  if (window.size() < 2) throw Error(ErrorCode::InsufficientFrames, "window holds " + std::to_string(window.size()) + " frames");
  // Times relative to the first frame keep the result identical under tick shifts.
  std::vector<double> xs(window.size()), ys(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    xs[i] = static_cast<double>(window[i].time - window.front().time) * kSecondsPerTick;
  }
  std::vector<double> out;
  out.reserve(column_of_.size() * 2);
  for (std::size_t p = 0; p < column_of_.size(); ++p) {
    double mean = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
      ys[i] = window[i].values[column_of_[p]];
      mean += ys[i];
    }
    mean /= static_cast<double>(window.size());
    const auto& stats = calibration_.parameters[p];
    out.push_back((mean - stats.mean) / stats.std);
    out.push_back((least_squares_slope(xs, ys) - stats.slope_mean) / stats.slope_std);
  }
  return out;
}

std::vector<double> window_features(const TelemetryStream& stream, std::size_t window_len, const Calibration& calibration) {
  if (window_len < 2 || stream.frames.size() < window_len) {
    throw Error(ErrorCode::InsufficientFrames, "need " + std::to_string(window_len) + " frames (minimum 2), have " +
                                                   std::to_string(stream.frames.size()));
  }
  Calibration c = calibration;
  c.window_len = window_len;
  const FeatureExtractor extractor(std::move(c), stream.columns);
  return extractor.features(std::span(stream.frames).last(window_len));
}

std::vector<EventSignature> parse_signatures(std::string_view json_text) {
  std::vector<EventSignature> out;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& j : doc.at("signatures")) {
      EventSignature s;
      s.event_id = j.at("event_id").get<std::string>();
      s.name = j.at("name").get<std::string>();
      s.centroid = j.at("centroid").get<std::vector<double>>();
      s.threshold = j.at("threshold").get<double>();
      if (!(s.threshold >= 0)) throw Error(ErrorCode::InvalidArgument, s.event_id + ": negative threshold");
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("signatures: ") + ex.what());
  }
  return out;
}

std::optional<EventLabel> detect(std::span<const double> features, const std::vector<EventSignature>& signatures) {
  if (signatures.empty()) throw Error(ErrorCode::InvalidArgument, "no event signatures");
  const EventSignature* best = nullptr;
  double best_d2 = 0.0;
  for (const auto& s : signatures) {
    if (s.centroid.size() != features.size()) {
      throw Error(ErrorCode::DimensionMismatch, s.event_id + " centroid has " + std::to_string(s.centroid.size()) +
                                                    " dimensions, features have " + std::to_string(features.size()));
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) d2 += (features[i] - s.centroid[i]) * (features[i] - s.centroid[i]);
    if (!best || d2 < best_d2 || (d2 == best_d2 && s.event_id < best->event_id)) {
      best = &s;
      best_d2 = d2;
    }
  }
  const double distance = std::sqrt(best_d2);
  if (distance > best->threshold) return std::nullopt;
  return EventLabel{best->event_id, best->name, distance, 0};
}

CentroidDetector::CentroidDetector(std::vector<EventSignature> signatures) : signatures_(std::move(signatures)) {
  if (signatures_.empty()) throw Error(ErrorCode::InvalidArgument, "no event signatures");
}

PerceptionPipeline::PerceptionPipeline(FeatureExtractor extractor, std::shared_ptr<const EventDetector> detector)
    : extractor_(std::move(extractor)), detector_(std::move(detector)) {}

std::optional<EventLabel> PerceptionPipeline::push(const TelemetryFrame& frame) {
  window_.push_back(frame);
  const std::size_t len = extractor_.calibration().window_len;
  while (window_.size() > len) window_.pop_front();
  if (window_.size() < len) return std::nullopt;
  scratch_.assign(window_.begin(), window_.end());
  auto label = detector_->detect(extractor_.features(scratch_));
  if (label) label->detected_at = frame.time;
  return label;
}

}  // namespace nuhf
