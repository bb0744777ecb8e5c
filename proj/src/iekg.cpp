#include "nuhf/iekg.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "nuhf/error.hpp"

namespace nuhf {

namespace {

constexpr std::pair<ElementKind, std::string_view> kKindNames[] = {
    {ElementKind::Screen, "screen"},   {ElementKind::Panel, "panel"},
    {ElementKind::Button, "button"},   {ElementKind::Toggle, "toggle"},
    {ElementKind::ValveControl, "valve_control"}, {ElementKind::Indicator, "indicator"},
    {ElementKind::Lookup, "lookup"},
};

constexpr std::pair<NavAction, std::string_view> kActionNames[] = {
    {NavAction::Click, "click"},
    {NavAction::Toggle, "toggle"},
    {NavAction::Lookup, "lookup"},
    {NavAction::Navigate, "navigate"},
};

std::string dot_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view to_string(ElementKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "screen";
}

std::string_view to_string(NavAction action) {
  for (const auto& [a, name] : kActionNames)
    if (a == action) return name;
  return "navigate";
}

ElementKind parse_element_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames)
    if (name == text) return k;
  throw Error(ErrorCode::InvalidGraph, "unknown element kind '" + std::string(text) + "'");
}

NavAction parse_nav_action(std::string_view text) {
  for (const auto& [a, name] : kActionNames)
    if (name == text) return a;
  throw Error(ErrorCode::InvalidGraph, "unknown edge action '" + std::string(text) + "'");
}

GraphFormat parse_graph_format(std::string_view text) {
  if (text == "json") return GraphFormat::Json;
  if (text == "dot") return GraphFormat::Dot;
  throw Error(ErrorCode::UnsupportedFormat, "graph format '" + std::string(text) + "'");
}

void IEKG::add_element(InterfaceElement element) {
  if (element.id.empty()) throw Error(ErrorCode::InvalidGraph, "element id is empty");
  if (index_.count(element.id)) throw Error(ErrorCode::DuplicateId, element.id);
  if (element.coords && !bounds_.contains(*element.coords)) {
    throw Error(ErrorCode::OutOfBounds, element.id + " at (" + std::to_string(element.coords->x) +
                                            ", " + std::to_string(element.coords->y) + ")");
  }
  if (element.parent) {
    auto it = index_.find(*element.parent);
    if (it == index_.end()) {
      throw Error(ErrorCode::MissingParent, element.id + " -> " + *element.parent);
    }
    element.layer = elements_[it->second].layer + 1;
  } else {
    element.layer = 0;
  }
  index_.emplace(element.id, elements_.size());
  elements_.push_back(std::move(element));
  adjacency_.emplace_back();
}

void IEKG::add_edge(NavigationEdge edge) {
  auto from = index_.find(edge.from);
  auto to = index_.find(edge.to);
  if (from == index_.end()) throw Error(ErrorCode::InvalidEdge, "unknown source " + edge.from);
  if (to == index_.end()) throw Error(ErrorCode::InvalidEdge, "unknown target " + edge.to);
  if (from->second == to->second) throw Error(ErrorCode::InvalidEdge, "self-loop on " + edge.from);
  auto& out = adjacency_[from->second];
  if (std::find(out.begin(), out.end(), to->second) != out.end()) {
    throw Error(ErrorCode::InvalidEdge, "duplicate edge " + edge.from + " -> " + edge.to);
  }
  auto pos = std::lower_bound(out.begin(), out.end(), to->second, [this](std::size_t a, std::size_t b) {
    return elements_[a].id < elements_[b].id;
  });
  out.insert(pos, to->second);
  edges_.push_back(std::move(edge));
}

bool IEKG::contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

std::size_t IEKG::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorCode::UnknownElement, std::string(id));
  return it->second;
}

const InterfaceElement& IEKG::element(std::string_view id) const { return elements_[index_of(id)]; }

bool IEKG::has_edge(std::string_view from, std::string_view to) const {
  auto f = index_.find(std::string(from));
  auto t = index_.find(std::string(to));
  if (f == index_.end() || t == index_.end()) return false;
  const auto& out = adjacency_[f->second];
  return std::find(out.begin(), out.end(), t->second) != out.end();
}

int IEKG::max_layer() const {
  int m = 0;
  for (const auto& e : elements_) m = std::max(m, e.layer);
  return m;
}

std::vector<std::string> IEKG::resolve_path(std::string_view from_id, std::string_view to_id) const {
  const std::size_t source = index_of(from_id);
  const std::size_t target = index_of(to_id);
  if (source == target) return {elements_[source].id};

  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> previous(elements_.size(), kUnvisited);
  previous[source] = source;
  std::deque<std::size_t> frontier{source};
  while (!frontier.empty() && previous[target] == kUnvisited) {
    const std::size_t current = frontier.front();
    frontier.pop_front();
    for (std::size_t next : adjacency_[current]) {
      if (previous[next] != kUnvisited) continue;
      previous[next] = current;
      frontier.push_back(next);
    }
  }
  if (previous[target] == kUnvisited) {
    throw Error(ErrorCode::Unreachable, "no route from " + std::string(from_id) + " to " + std::string(to_id));
  }
  std::vector<std::string> path;
  for (std::size_t at = target; at != source; at = previous[at]) path.push_back(elements_[at].id);
  path.push_back(elements_[source].id);
  std::reverse(path.begin(), path.end());
  return path;
}

std::optional<std::string> IEKG::element_at(ScreenPoint point, double tolerance_px) const {
  if (tolerance_px < 0) throw Error(ErrorCode::InvalidArgument, "negative tolerance");
  const InterfaceElement* best = nullptr;
  std::int64_t best_d2 = 0;
  for (const auto& e : elements_) {
    if (!e.coords) continue;
    const std::int64_t dx = e.coords->x - point.x;
    const std::int64_t dy = e.coords->y - point.y;
    const std::int64_t d2 = dx * dx + dy * dy;
    if (static_cast<double>(d2) > tolerance_px * tolerance_px) continue;
    const bool better = best == nullptr || d2 < best_d2 ||
                        (d2 == best_d2 && (e.layer > best->layer || (e.layer == best->layer && e.id < best->id)));
    if (better) {
      best = &e;
      best_d2 = d2;
    }
  }
  if (!best) return std::nullopt;
  return best->id;
}

std::string IEKG::export_graph(GraphFormat format) const {
  if (format == GraphFormat::Dot) {
    std::ostringstream out;
    out << "digraph iekg {\n";
    for (const auto& e : elements_) {
      out << "  \"" << dot_escape(e.id) << "\" [label=\"" << dot_escape(e.label);
      if (e.coords) out << "\\n(" << e.coords->x << ", " << e.coords->y << ")";
      out << "\", layer=" << e.layer << "];\n";
    }
    for (const auto& edge : edges_) {
      out << "  \"" << dot_escape(edge.from) << "\" -> \"" << dot_escape(edge.to) << "\" [label=\""
          << to_string(edge.action) << "\"];\n";
    }
    out << "}\n";
    return out.str();
  }

  nlohmann::ordered_json doc;
  doc["elements"] = nlohmann::ordered_json::array();
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : elements_) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["label"] = e.label;
    j["kind"] = to_string(e.kind);
    j["x"] = e.coords ? nlohmann::ordered_json(e.coords->x) : nlohmann::ordered_json(nullptr);
    j["y"] = e.coords ? nlohmann::ordered_json(e.coords->y) : nlohmann::ordered_json(nullptr);
    j["layer"] = e.layer;
    j["parent"] = e.parent ? nlohmann::ordered_json(*e.parent) : nlohmann::ordered_json(nullptr);
    doc["elements"].push_back(std::move(j));
  }
  for (const auto& edge : edges_) {
    doc["edges"].push_back({{"from", edge.from}, {"to", edge.to}, {"action", to_string(edge.action)}});
  }
  return doc.dump(2) + "\n";
}

IEKG IEKG::import_json(std::string_view text, ScreenBounds bounds) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidGraph, std::string("not JSON: ") + ex.what());
  }
  IEKG graph(bounds);
  try {
    for (const auto& j : doc.value("elements", nlohmann::json::array())) {
      InterfaceElement e;
      e.id = j.at("id").get<std::string>();
      e.label = j.value("label", e.id);
      e.kind = parse_element_kind(j.value("kind", std::string("screen")));
      const bool has_x = j.contains("x") && !j["x"].is_null();
      const bool has_y = j.contains("y") && !j["y"].is_null();
      if (has_x != has_y) throw Error(ErrorCode::InvalidGraph, e.id + " has only one coordinate");
      if (has_x) e.coords = ScreenPoint{j["x"].get<int>(), j["y"].get<int>()};
      if (j.contains("parent") && !j["parent"].is_null()) e.parent = j["parent"].get<std::string>();
      const int declared_layer = j.contains("layer") ? j["layer"].get<int>() : -1;
      graph.add_element(e);
      const int derived = graph.elements_.back().layer;
      if (declared_layer >= 0 && declared_layer != derived) {
        throw Error(ErrorCode::InvalidGraph, e.id + " declares layer " + std::to_string(declared_layer) +
                                                 " but its parent chain gives " + std::to_string(derived));
      }
    }
    for (const auto& j : doc.value("edges", nlohmann::json::array())) {
      graph.add_edge({j.at("from").get<std::string>(), j.at("to").get<std::string>(),
                      parse_nav_action(j.value("action", std::string("navigate")))});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidGraph, ex.what());
  }
  return graph;
}

}  // namespace nuhf
