#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nuhf/cognitive_twin.hpp"
#include "support.hpp"

using namespace nuhf;
using Catch::Approx;
using testing::error_of;

namespace {

ExecutionPath path_of(std::size_t nodes, StepKind kind = StepKind::ScreenNavigation) {
  ExecutionPath p;
  p.step_id = "T";
  p.step_kind = kind;
  for (std::size_t i = 0; i < nodes; ++i) {
    p.nodes.push_back({"n" + std::to_string(i), "N", ScreenPoint{100 + int(i) * 50, 200}, NavAction::Click});
  }
  p.multi_action = nodes > 1;
  return p;
}

double monte_carlo_exceedance(double median, double sigma, double t_avail, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> required(std::log(median), sigma);
  std::size_t over = 0;
  for (std::size_t i = 0; i < samples; ++i)
    if (required(rng) > t_avail) ++over;
  return static_cast<double>(over) / static_cast<double>(samples);
}

}  // namespace

TEST_CASE("Primitive sequences per node", "[twin]") {
  const auto one = compile_primitives(path_of(1));
  REQUIRE(one.size() == 4);
  CHECK(one[0].kind == PrimitiveKind::MentalPrep);
  CHECK(one[1].kind == PrimitiveKind::VisualSearch);
  CHECK(one[2].kind == PrimitiveKind::Point);
  CHECK(one[3].kind == PrimitiveKind::Click);

  CHECK(compile_primitives(path_of(12)).size() == 1 + 12 * 3);

  const auto check = compile_primitives(path_of(1, StepKind::ParameterCheck));
  REQUIRE(check.size() == 5);
  CHECK(check[4].kind == PrimitiveKind::ReadValue);

  CHECK(error_of([] { compile_primitives(ExecutionPath{}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Pointing time follows the Fitts form", "[twin]") {
  const TimingConfig cfg;
  const PrimitiveAction point{PrimitiveKind::Point, 500.0, 30.0};
  CHECK(primitive_time(point, cfg) == Approx(0.1 + 0.15 * std::log2(500.0 / 30.0 + 1.0)).epsilon(1e-12));
  CHECK(primitive_time(point, cfg) == Approx(0.7214).margin(1e-4));
  CHECK(error_of([&] { primitive_time({PrimitiveKind::Point, -1.0, 30.0}, cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Median estimate is additive", "[twin]") {
  const TimingConfig cfg;
  CHECK(estimate_median({}, cfg) == 0.0);
  const auto c = PrimitiveAction::of(PrimitiveKind::Click);
  CHECK(estimate_median({c, c}, cfg) == 2.0 * estimate_median({c}, cfg));
  const auto prims = compile_primitives(path_of(3), cfg);
  double sum = 0.0;
  for (const auto& p : prims) sum += primitive_time(p, cfg);
  CHECK(estimate_median(prims, cfg) == Approx(sum).epsilon(1e-15));
}

TEST_CASE("Timing config parsing", "[twin]") {
  const auto cfg = parse_timing_config("# test\nclick = 0.3\nsigma=0.5\nworkload.mental.base = 12\n");
  CHECK(cfg.click_s == 0.3);
  CHECK(cfg.sigma == 0.5);
  CHECK(cfg.workload.mental.base == 12.0);
  CHECK(cfg.visual_search_s == TimingConfig{}.visual_search_s);
  CHECK(error_of([] { parse_timing_config("bogus = 1\n"); }) == ErrorCode::Parse);
  CHECK(error_of([] { parse_timing_config("click = fast\n"); }) == ErrorCode::UnparseableNumber);
}

TEST_CASE("P_t closed form", "[twin]") {
  const TimeEstimate est(60.0, 0.28);
  CHECK(p_t(est, 60.0) == Approx(0.5).margin(1e-12));
  CHECK(p_t(est, 1e9) < 1e-12);
  for (int z = -2; z <= 2; ++z) {
    const double t = 60.0 * std::exp(0.28 * z);
    CHECK(p_t(est, t) == Approx(1.0 - standard_normal_cdf(z)).margin(1e-12));
  }
  CHECK(error_of([&] { p_t(est, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { TimeEstimate(0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("P_t agrees with a lognormal Monte Carlo", "[twin]") {
  const double mc = monte_carlo_exceedance(60.0, 0.28, 90.0, 1'000'000, 7);
  CHECK(mc == Approx(0.0738).margin(1e-3));
  CHECK(p_t(TimeEstimate(60.0, 0.28), 90.0) == Approx(mc).margin(1e-3));
}

TEST_CASE("P_t is monotone in t_avail and median", "[twin]") {
  const TimeEstimate est(20.0);
  double prev = 2.0;
  for (int i = 0; i < 100; ++i) {
    const double v = p_t(est, 10.0 + 0.3 * i);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(p_t(TimeEstimate(25.0), 30.0) > p_t(TimeEstimate(20.0), 30.0));
}

TEST_CASE("Workload aggregation reproduces the role table", "[twin][workload]") {
  CHECK(aggregate_workload({100, 10, 100, 95, 100, 20}) == Approx(55.83).margin(0.01));
  CHECK(aggregate_workload({70, 10, 20, 80, 70, 10}) == Approx(33.33).margin(0.01));
  CHECK(aggregate_workload({80, 10, 20, 80, 80, 10}) == Approx(36.67).margin(0.01));
  CHECK(aggregate_workload({0, 0, 0, 100, 0, 0}) == 0.0);
  CHECK(error_of([] { aggregate_workload({101, 0, 0, 0, 0, 0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Predicted workload is monotone and clamped", "[twin][workload]") {
  const auto base = predict_workload({});
  const WorkloadModel model;
  CHECK(base.mental == model.mental.base);
  CHECK(base.physical == model.physical.base);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const RunContext small{u(rng) * 5, u(rng), u(rng) * 4};
    const RunContext large{small.path_length + 1 + u(rng), small.time_pressure_ratio + 0.1 + u(rng),
                           small.pending_steps + u(rng)};
    const auto a = predict_workload(small).as_array();
    const auto b = predict_workload(large).as_array();
    for (std::size_t d = 0; d < 6; ++d) CHECK(b[d] >= a[d]);
  }

  const auto sat = predict_workload({1e6, 1e6, 1e6}).as_array();
  for (double v : sat) CHECK(v <= 100.0);
  CHECK(predict_workload({1e6, 1e6, 1e6}).physical == model.physical.base);
  CHECK(error_of([] { predict_workload({-1, 0, 0}); }) == ErrorCode::InvalidArgument);
}
