#include "nuhf/safety_gate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "nuhf/error.hpp"

namespace nuhf {

namespace {

constexpr double kRowTolerance = 1e-9;

std::string band(double value, double moderate, double high, std::string_view low_name) {
  if (value >= high) return "high";
  if (value >= moderate) return "moderate";
  return std::string(low_name);
}

}  // namespace

BayesNetwork BayesNetwork::build(std::vector<BayesNode> nodes) {
  BayesNetwork net;
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.name.empty()) throw Error(ErrorCode::InvalidArgument, "node without a name");
    if (n.states.empty()) throw Error(ErrorCode::InvalidArgument, "node " + n.name + " has no states");
    std::set<std::string> distinct(n.states.begin(), n.states.end());
    if (distinct.size() != n.states.size()) throw Error(ErrorCode::InvalidArgument, "node " + n.name + " repeats a state");
    if (!index.emplace(n.name, i).second) throw Error(ErrorCode::DuplicateId, "node " + n.name);
  }

  net.parent_index_.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    std::size_t rows = 1;
    for (const auto& p : n.parents) {
      auto it = index.find(p);
      if (it == index.end()) throw Error(ErrorCode::UnknownNode, "parent " + p + " of " + n.name);
      if (it->second == i) throw Error(ErrorCode::CyclicTopology, n.name + " is its own parent");
      net.parent_index_[i].push_back(it->second);
      rows *= nodes[it->second].states.size();
    }
    if (n.cpt.size() != rows) {
      throw Error(ErrorCode::InvalidArgument, "node " + n.name + " has " + std::to_string(n.cpt.size()) +
                                                  " CPT rows, expected " + std::to_string(rows));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      auto& row = n.cpt[r];
      if (row.size() != n.states.size()) {
        throw Error(ErrorCode::InvalidArgument, "node " + n.name + " row " + std::to_string(r) + " has wrong width");
      }
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw Error(ErrorCode::UnnormalizedCpt, "node " + n.name + " row " + std::to_string(r) + " has entry outside [0, 1]");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowTolerance) {
        throw Error(ErrorCode::UnnormalizedCpt, "node " + n.name + " row " + std::to_string(r) + " sums to " + std::to_string(sum));
      }
      for (double& p : row) p /= sum;
    }
  }

  // Kahn's algorithm; ties resolved by declaration order.
  std::vector<std::size_t> pending(nodes.size());
  std::vector<std::vector<std::size_t>> children(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    pending[i] = net.parent_index_[i].size();
    for (std::size_t p : net.parent_index_[i]) children[p].push_back(i);
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (pending[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    const std::size_t next = *ready.begin();
    ready.erase(ready.begin());
    net.order_.push_back(next);
    for (std::size_t c : children[next])
      if (--pending[c] == 0) ready.insert(c);
  }
  if (net.order_.size() != nodes.size()) {
    std::string stuck;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (pending[i] > 0) stuck += (stuck.empty() ? "" : ", ") + nodes[i].name;
    throw Error(ErrorCode::CyclicTopology, "cycle through " + stuck);
  }
  net.nodes_ = std::move(nodes);
  return net;
}

std::size_t BayesNetwork::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == name) return i;
  throw Error(ErrorCode::UnknownNode, std::string(name));
}

const BayesNode& BayesNetwork::node(std::string_view name) const { return nodes_[index_of(name)]; }

std::size_t BayesNetwork::state_index(std::size_t node, std::string_view state) const {
  const auto& states = nodes_[node].states;
  auto it = std::find(states.begin(), states.end(), state);
  if (it == states.end()) throw Error(ErrorCode::UnknownState, nodes_[node].name + "=" + std::string(state));
  return static_cast<std::size_t>(it - states.begin());
}

double BayesNetwork::conditional(std::size_t node, const std::vector<std::size_t>& assignment) const {
  std::size_t row = 0;
  for (std::size_t p : parent_index_[node]) row = row * nodes_[p].states.size() + assignment[p];
  return nodes_[node].cpt[row][assignment[node]];
}

double BayesNetwork::enumerate(std::size_t depth, std::vector<std::size_t>& assignment,
                               const std::vector<std::optional<std::size_t>>& observed) const {
  if (depth == order_.size()) return 1.0;
  const std::size_t node = order_[depth];
  if (observed[node]) {
    assignment[node] = *observed[node];
    const double p = conditional(node, assignment);
    return p == 0.0 ? 0.0 : p * enumerate(depth + 1, assignment, observed);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < nodes_[node].states.size(); ++s) {
    assignment[node] = s;
    const double p = conditional(node, assignment);
    if (p != 0.0) total += p * enumerate(depth + 1, assignment, observed);
  }
  return total;
}

std::vector<double> BayesNetwork::posterior(std::string_view query, const Evidence& evidence) const {
  const std::size_t q = index_of(query);
  std::vector<std::optional<std::size_t>> observed(nodes_.size());
  for (const auto& [name, state] : evidence) {
    const std::size_t i = index_of(name);
    observed[i] = state_index(i, state);
  }

  std::vector<std::size_t> assignment(nodes_.size(), 0);
  std::vector<double> dist(nodes_[q].states.size(), 0.0);
  if (observed[q]) {
    dist[*observed[q]] = 1.0;
    return dist;
  }
  double norm = 0.0;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    observed[q] = s;
    dist[s] = enumerate(0, assignment, observed);
    norm += dist[s];
  }
  if (norm <= 0.0) throw Error(ErrorCode::InvalidArgument, "evidence has zero probability");
  for (double& p : dist) p /= norm;
  return dist;
}

double BayesNetwork::probability(std::string_view query, std::string_view state, const Evidence& evidence) const {
  const std::size_t q = index_of(query);
  return posterior(query, evidence)[state_index(q, state)];
}

void GateThresholds::validate() const {
  if (!(allow_below > 0 && allow_below <= suggest_below && suggest_below <= 1)) {
    throw Error(ErrorCode::InvalidThresholds, "need 0 < allow_below <= suggest_below <= 1, got " +
                                                  std::to_string(allow_below) + ", " + std::to_string(suggest_below));
  }
}

namespace {

BayesNetwork network_from_json(const nlohmann::json& doc) {
  std::vector<BayesNode> nodes;
  for (const auto& j : doc.at("nodes")) {
    BayesNode n;
    n.name = j.at("name").get<std::string>();
    n.states = j.at("states").get<std::vector<std::string>>();
    n.parents = j.value("parents", std::vector<std::string>{});
    n.cpt = j.at("cpt").get<std::vector<std::vector<double>>>();
    nodes.push_back(std::move(n));
  }
  return BayesNetwork::build(std::move(nodes));
}

nlohmann::json parse_doc(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("Bayesian network config: ") + ex.what());
  }
}

}  // namespace

BayesNetwork build_network(std::string_view json_text) {
  const auto doc = parse_doc(json_text);
  try {
    return network_from_json(doc);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("Bayesian network config: ") + ex.what());
  }
}

GateConfig parse_gate_config(std::string_view text) {
  const auto doc = parse_doc(text);
  GateConfig config;
  try {
    config.network = network_from_json(doc);
    if (doc.contains("thresholds")) {
      config.thresholds.allow_below = doc["thresholds"].value("allow_below", config.thresholds.allow_below);
      config.thresholds.suggest_below = doc["thresholds"].value("suggest_below", config.thresholds.suggest_below);
    }
    if (doc.contains("evidence")) {
      const auto& e = doc["evidence"];
      auto& b = config.bands;
      b.p_t_moderate = e.value("p_t_moderate", b.p_t_moderate);
      b.p_t_high = e.value("p_t_high", b.p_t_high);
      b.p_c_moderate = e.value("p_c_moderate", b.p_c_moderate);
      b.p_c_high = e.value("p_c_high", b.p_c_high);
      b.workload_high = e.value("workload_high", b.workload_high);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, std::string("Bayesian network config: ") + ex.what());
  }
  config.thresholds.validate();
  for (auto name : {bn::kTimePressure, bn::kCognitiveLoad, bn::kPifSeverity, bn::kConfusion, bn::kActionRisk}) {
    config.network.index_of(name);
  }
  config.network.state_index(config.network.index_of(bn::kActionRisk), "high");
  return config;
}

Evidence discretize(double p_t, double p_c, double workload_score, bool confusion, const EvidenceBands& bands) {
  Evidence e;
  e[std::string(bn::kTimePressure)] = band(p_t, bands.p_t_moderate, bands.p_t_high, "low");
  e[std::string(bn::kPifSeverity)] = band(p_c, bands.p_c_moderate, bands.p_c_high, "nominal");
  e[std::string(bn::kCognitiveLoad)] = workload_score >= bands.workload_high ? "high" : "low";
  e[std::string(bn::kConfusion)] = confusion ? "true" : "false";
  return e;
}

double infer_action_risk(const BayesNetwork& network, const Evidence& evidence) {
  return network.probability(bn::kActionRisk, "high", evidence);
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Allow: return "Allow";
    case Verdict::Suggest: return "Suggest";
    case Verdict::Block: return "Block";
  }
  return "Allow";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "Allow") return Verdict::Allow;
  if (text == "Suggest") return Verdict::Suggest;
  if (text == "Block") return Verdict::Block;
  throw Error(ErrorCode::Parse, "unknown verdict '" + std::string(text) + "'");
}

GateDecision decide(double action_risk, const GateThresholds& thresholds, std::vector<Factor> context) {
  thresholds.validate();
  if (!(action_risk >= 0.0 && action_risk <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "action risk outside [0, 1]");
  }
  GateDecision d;
  if (action_risk < thresholds.allow_below) d.verdict = Verdict::Allow;
  else if (action_risk < thresholds.suggest_below) d.verdict = Verdict::Suggest;
  else d.verdict = Verdict::Block;
  d.approval_required = d.verdict != Verdict::Allow;
  d.explanation.push_back({"risk", "action_risk", std::string(to_string(d.verdict)), action_risk, false});
  for (auto& f : context) d.explanation.push_back(std::move(f));
  return d;
}

std::optional<std::string> dominant_evidence(const BayesNetwork& network, const Evidence& evidence) {
  const double base = infer_action_risk(network, evidence);
  std::optional<std::string> best;
  double best_drop = 0.0;
  for (const auto& [name, state] : evidence) {
    const auto& node = network.node(name);
    if (node.name == bn::kActionRisk || node.states.front() == state) continue;
    Evidence reset = evidence;
    reset[name] = node.states.front();
    const double drop = base - infer_action_risk(network, reset);
    if (!best || drop > best_drop) {
      best = name;
      best_drop = drop;
    }
  }
  return best;
}

double fuse_step_hep(double p_t, double p_c) {
  if (!(p_t >= 0 && p_t <= 1 && p_c >= 0 && p_c <= 1)) throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
  return 1.0 - (1.0 - p_t) * (1.0 - p_c);
}

double systemic_hep(const std::vector<double>& step_heps) {
  double survive = 1.0;
  for (double h : step_heps) {
    if (!(h >= 0 && h <= 1)) throw Error(ErrorCode::InvalidArgument, "step HEP outside [0, 1]");
    survive *= 1.0 - h;
  }
  return 1.0 - survive;
}

}  // namespace nuhf
