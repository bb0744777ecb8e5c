#pragma once

#include <json.hpp>

#include "nuhf/perception.hpp"
#include "nuhf/session.hpp"
#include "support.hpp"

namespace testing {

// First label the sliding-window detector produces over a whole recording.
inline std::optional<nuhf::EventLabel> first_detection(const nuhf::Scenario& scenario,
                                                       const nuhf::TelemetryStream& stream) {
  nuhf::PerceptionPipeline pipeline(nuhf::FeatureExtractor(scenario.calibration, stream.columns),
                                    std::make_shared<nuhf::CentroidDetector>(scenario.signatures));
  for (const auto& frame : stream.frames)
    if (auto label = pipeline.push(frame)) return label;
  return std::nullopt;
}

struct CorpusScore {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::vector<std::string> misses;

  double precision() const {
    const auto predicted = true_positive + false_positive;
    return predicted == 0 ? 0.0 : static_cast<double>(true_positive) / static_cast<double>(predicted);
  }
  double recall() const {
    const auto actual = true_positive + false_negative;
    return actual == 0 ? 0.0 : static_cast<double>(true_positive) / static_cast<double>(actual);
  }
};

// A recording counts as a true positive only when its first detection carries
// the labelled event; any detection on a nominal recording is a false positive.
inline CorpusScore score_corpus(const nuhf::Scenario& scenario) {
  const auto labels = nlohmann::json::parse(nuhf::detail::read_file(kCorpus / "labels.json"));
  CorpusScore score;
  for (const auto& [file, label] : labels.items()) {
    const auto stream = nuhf::load_telemetry(kCorpus / file, scenario);
    const auto got = first_detection(scenario, stream);
    if (label.is_null()) {
      if (got) {
        ++score.false_positive;
        score.misses.push_back(file + " -> " + got->event_id);
      }
      continue;
    }
    const auto want = label.get<std::string>();
    if (got && got->event_id == want) {
      ++score.true_positive;
    } else {
      ++score.false_negative;
      if (got) ++score.false_positive;
      score.misses.push_back(file + " -> " + (got ? got->event_id : std::string("none")));
    }
  }
  return score;
}

}  // namespace testing
