#pragma once

// Interface-embedded knowledge graph: soft-control screen elements with their
// screen coordinates, a parent hierarchy (layers), and directed navigation edges.
//
// The graph is built by a single writer and is read-only afterwards; const
// member functions are safe to call concurrently.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nuhf {

enum class ElementKind { Screen, Panel, Button, Toggle, ValveControl, Indicator, Lookup };
enum class NavAction { Click, Toggle, Lookup, Navigate };

std::string_view to_string(ElementKind kind);
std::string_view to_string(NavAction action);
ElementKind parse_element_kind(std::string_view text);
NavAction parse_nav_action(std::string_view text);

struct ScreenPoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const ScreenPoint&, const ScreenPoint&) = default;
};

struct ScreenBounds {
  int width = 1920;
  int height = 1080;

  bool contains(ScreenPoint p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
};

struct InterfaceElement {
  std::string id;
  std::string label;
  ElementKind kind = ElementKind::Screen;
  // Absent for elements that appear in procedures without a registered
  // on-screen position (dialog stages such as "Parameter Tuning").
  std::optional<ScreenPoint> coords;
  int layer = 0;
  std::optional<std::string> parent;

  friend bool operator==(const InterfaceElement&, const InterfaceElement&) = default;
};

struct NavigationEdge {
  std::string from;
  std::string to;
  NavAction action = NavAction::Navigate;

  friend bool operator==(const NavigationEdge&, const NavigationEdge&) = default;
};

enum class GraphFormat { Json, Dot };
GraphFormat parse_graph_format(std::string_view text);

class IEKG {
 public:
  explicit IEKG(ScreenBounds bounds = {}) : bounds_(bounds) {}

  /// Adds an element. `layer` is derived from the parent (0 for roots); a
  /// caller-supplied layer is overwritten.
  void add_element(InterfaceElement element);
  void add_edge(NavigationEdge edge);

  bool contains(std::string_view id) const;
  const InterfaceElement& element(std::string_view id) const;
  const std::vector<InterfaceElement>& elements() const { return elements_; }
  const std::vector<NavigationEdge>& edges() const { return edges_; }
  bool has_edge(std::string_view from, std::string_view to) const;
  ScreenBounds bounds() const { return bounds_; }
  int max_layer() const;

  /// Unweighted shortest path along directed edges, inclusive of both ends.
  /// Neighbours are explored in id order, so equal-length alternatives
  /// resolve deterministically.
  std::vector<std::string> resolve_path(std::string_view from_id, std::string_view to_id) const;

  /// Nearest element within `tolerance_px` (Euclidean). Ties go to the deeper
  /// layer, then the lexicographically smaller id.
  std::optional<std::string> element_at(ScreenPoint point, double tolerance_px) const;

  std::string export_graph(GraphFormat format) const;
  static IEKG import_json(std::string_view text, ScreenBounds bounds = {});

  friend bool operator==(const IEKG& a, const IEKG& b) {
    return a.elements_ == b.elements_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t index_of(std::string_view id) const;

  ScreenBounds bounds_;
  std::vector<InterfaceElement> elements_;
  std::vector<NavigationEdge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  // Outgoing neighbour indices per element, kept sorted by neighbour id.
  std::vector<std::vector<std::size_t>> adjacency_;
};

}  // namespace nuhf
