#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "bn_oracle.hpp"
#include "nuhf/safety_gate.hpp"
#include "support.hpp"

using namespace nuhf;
using Catch::Approx;
using testing::error_of;

namespace {

std::vector<BayesNode> two_node() {
  return {
      {"A", {"lo", "hi"}, {}, {{0.7, 0.3}}},
      {"B", {"low", "high"}, {"A"}, {{0.9, 0.1}, {0.2, 0.8}}},
  };
}

const GateConfig& fixture_gate() {
  static const GateConfig g = parse_gate_config(testing::fixture_text("shutdown/gate.json"));
  return g;
}

}  // namespace

TEST_CASE("Default gate network has four roots and one child", "[gate][bn]") {
  const auto& net = fixture_gate().network;
  REQUIRE(net.nodes().size() == 5);
  std::size_t roots = 0;
  for (const auto& n : net.nodes()) roots += n.parents.empty() ? 1 : 0;
  CHECK(roots == 4);
  CHECK(net.node(bn::kActionRisk).parents.size() == 4);
  CHECK(fixture_gate().thresholds.allow_below == 1e-3);
  CHECK(fixture_gate().thresholds.suggest_below == 5e-2);
}

TEST_CASE("Network validation", "[gate][bn]") {
  auto bad_sum = two_node();
  bad_sum[1].cpt[0] = {0.5, 0.4};
  CHECK(error_of([&] { BayesNetwork::build(bad_sum); }) == ErrorCode::UnnormalizedCpt);

  auto cyclic = two_node();
  cyclic[0].parents = {"B"};
  cyclic[0].cpt = {{0.5, 0.5}, {0.5, 0.5}};
  CHECK(error_of([&] { BayesNetwork::build(cyclic); }) == ErrorCode::CyclicTopology);

  auto orphan = two_node();
  orphan[1].parents = {"Z"};
  CHECK(error_of([&] { BayesNetwork::build(orphan); }) == ErrorCode::UnknownNode);

  auto short_cpt = two_node();
  short_cpt[1].cpt.pop_back();
  CHECK(error_of([&] { BayesNetwork::build(short_cpt); }) == ErrorCode::InvalidArgument);

  CHECK(error_of([] { build_network(R"({"nodes":[{"name":"A","states":["x"]}]})"); }) == ErrorCode::Parse);
}

TEST_CASE("Gate config with a cycle through ActionRisk is rejected", "[gate][bn]") {
  auto nodes = fixture_gate().network.nodes();
  for (auto& n : nodes) {
    if (n.name != bn::kTimePressure) continue;
    n.parents = {std::string(bn::kActionRisk)};
    n.cpt = {n.cpt[0], n.cpt[0]};
  }
  CHECK(error_of([&] { BayesNetwork::build(nodes); }) == ErrorCode::CyclicTopology);
}

TEST_CASE("Inference on a hand-sized network", "[gate][bn]") {
  const auto net = BayesNetwork::build(two_node());
  CHECK(net.probability("B", "high", {{"A", "hi"}}) == Approx(0.8).margin(1e-12));
  // Prior: 0.7*0.1 + 0.3*0.8
  CHECK(net.probability("B", "high", {}) == Approx(0.31).margin(1e-12));
  // Bayes: 0.3*0.8 / 0.31
  CHECK(net.probability("A", "hi", {{"B", "high"}}) == Approx(0.24 / 0.31).margin(1e-12));
  CHECK(net.probability("A", "hi", {{"A", "hi"}}) == 1.0);
  CHECK(error_of([&] { net.posterior("C", {}); }) == ErrorCode::UnknownNode);
  CHECK(error_of([&] { net.posterior("B", {{"A", "medium"}}); }) == ErrorCode::UnknownState);
}

TEST_CASE("Enumeration matches a dense joint on random networks", "[gate][bn]") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 150; ++trial) {
    const auto q = testing::random_network(rng);
    const auto net = BayesNetwork::build(q.nodes);
    const auto got = net.posterior(q.query, q.evidence);
    const auto want = testing::dense_posterior(q.nodes, q.query, q.evidence);
    REQUIRE(got.size() == want.size());
    for (std::size_t s = 0; s < got.size(); ++s) CHECK(got[s] == Approx(want[s]).margin(1e-9));
  }
}

TEST_CASE("Fixture gate posterior with full evidence equals the CPT row", "[gate][bn]") {
  const auto& net = fixture_gate().network;
  const auto& risk = net.node(bn::kActionRisk);
  const Evidence e{{"Confusion", "false"}, {"CognitiveLoad", "low"}, {"PIFSeverity", "nominal"}, {"TimePressure", "low"}};
  const auto high = static_cast<std::size_t>(std::find(risk.states.begin(), risk.states.end(), "high") - risk.states.begin());
  // Every evidence node is at its first state, so the odometer row is 0.
  CHECK(infer_action_risk(net, e) == Approx(risk.cpt[0][high]).margin(1e-12));
  CHECK(infer_action_risk(net, e) == Approx(testing::dense_posterior(net.nodes(), "ActionRisk", e)[high]).margin(1e-12));
}

TEST_CASE("Discretisation bands", "[gate]") {
  const EvidenceBands bands;
  auto e = discretize(0.0, 0.0, 10.0, false, bands);
  CHECK(e.at("TimePressure") == "low");
  CHECK(e.at("PIFSeverity") == "nominal");
  CHECK(e.at("CognitiveLoad") == "low");
  CHECK(e.at("Confusion") == "false");
  e = discretize(0.2, 0.06, 55.83, true, bands);
  CHECK(e.at("TimePressure") == "high");
  CHECK(e.at("PIFSeverity") == "high");
  CHECK(e.at("CognitiveLoad") == "high");
  CHECK(e.at("Confusion") == "true");
  CHECK(discretize(0.05, 0.02, 0, false, bands).at("TimePressure") == "moderate");
}

TEST_CASE("decide maps risk to verdicts", "[gate]") {
  const GateThresholds t;
  CHECK(decide(0.0, t).verdict == Verdict::Allow);
  CHECK_FALSE(decide(0.0, t).approval_required);
  const auto s = decide(0.02, t);
  CHECK(s.verdict == Verdict::Suggest);
  CHECK(s.approval_required);
  CHECK(decide(0.9, t).verdict == Verdict::Block);
  CHECK(decide(1e-3, t).verdict == Verdict::Suggest);
  CHECK(decide(5e-2, t).verdict == Verdict::Block);
  CHECK_FALSE(decide(0.5, t).explanation.empty());
  CHECK(decide(0.5, t).explanation.front().name == "action_risk");

  CHECK(error_of([] { decide(0.1, GateThresholds{0.2, 0.1}); }) == ErrorCode::InvalidThresholds);
  CHECK(error_of([] { decide(0.1, GateThresholds{0.0, 0.1}); }) == ErrorCode::InvalidThresholds);
  CHECK(error_of([] { decide(1.5, GateThresholds{}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Verdict severity is non-decreasing in risk", "[gate]") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double a = u(rng) * 0.5, b = u(rng);
    if (a > b) std::swap(a, b);
    const GateThresholds t{std::max(a, 1e-9), std::max(b, 1e-9)};
    std::vector<double> risks(200);
    for (double& r : risks) r = u(rng);
    std::sort(risks.begin(), risks.end());
    int prev = -1;
    for (double r : risks) {
      const int v = static_cast<int>(decide(r, t).verdict);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("fuse_step_hep", "[gate]") {
  CHECK(fuse_step_hep(0, 0) == 0.0);
  CHECK(fuse_step_hep(0.1, 0.2) == Approx(0.28).margin(1e-15));
  CHECK(fuse_step_hep(1.0, 0.37) == 1.0);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng);
    const double f = fuse_step_hep(a, b);
    CHECK(f == fuse_step_hep(b, a));
    CHECK(f >= std::max(a, b) - 1e-15);
    CHECK(f <= std::min(1.0, a + b) + 1e-15);
  }
  CHECK(error_of([] { fuse_step_hep(-0.1, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("systemic_hep", "[gate]") {
  CHECK(systemic_hep({}) == 0.0);
  CHECK(systemic_hep({0.01, 0.01}) == Approx(0.0199).margin(1e-15));
  CHECK(systemic_hep({0.3, 1.0, 0.2}) == 1.0);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> h(1 + i % 12);
    for (double& v : h) v = u(rng);
    const double base = systemic_hep(h);
    std::shuffle(h.begin(), h.end(), rng);
    CHECK(systemic_hep(h) == Approx(base).margin(1e-15));
  }
}

TEST_CASE("Dominant evidence names the node whose reset helps most", "[gate]") {
  const auto& net = fixture_gate().network;
  CHECK_FALSE(dominant_evidence(net, discretize(0, 0, 0, false, fixture_gate().bands)).has_value());
  const auto name = dominant_evidence(net, discretize(0.0, 0.0, 0.0, true, fixture_gate().bands));
  CHECK(name == std::optional<std::string>("Confusion"));
}
