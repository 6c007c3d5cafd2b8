#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptlayout {

enum class EnergyDomain { mechanical, electrical };
enum class ElementKind { component, subsystem };
enum class ConnectionKind { direct, indirect };
enum class Edge { top, bottom, right, left };

/// Which column set of the orientation truth table applies to a port: the
/// first element of an interference pair reads it as-is, the second one with
/// Top/Bottom and Right/Left exchanged.
enum class Perspective { ego, connecting };

[[nodiscard]] std::string to_string(EnergyDomain d);
[[nodiscard]] std::string to_string(ElementKind k);
[[nodiscard]] std::string to_string(ConnectionKind k);
[[nodiscard]] std::string to_string(Edge e);
[[nodiscard]] std::string to_string(Perspective p);
[[nodiscard]] Edge opposite(Edge e);

/// Port position relative to the element center, (lateral, longitudinal).
struct Offset {
  double a = 0.0;
  double b = 0.0;
  bool operator==(const Offset&) const = default;
};

struct PortSpec {
  std::string id;
  EnergyDomain domain = EnergyDomain::electrical;
  ConnectionKind connection_kind = ConnectionKind::indirect;
  std::optional<Offset> default_offset;  // components only
  bool operator==(const PortSpec&) const = default;
};

/// Anchors for elements that are not free to move (wheels, axle-mounted
/// parts). Any subset may be given; missing entries stay decision variables.
struct FixedPose {
  std::optional<double> x;
  std::optional<double> y;
  std::optional<bool> m;
  std::optional<bool> n;
  std::optional<bool> r;
  bool operator==(const FixedPose&) const = default;
};

struct ElementSpec {
  std::string id;
  ElementKind kind = ElementKind::component;
  double default_width = 0.0;   // components only
  double default_length = 0.0;  // components only
  std::vector<PortSpec> ports;
  std::vector<ElementSpec> children;  // subsystems only
  std::optional<FixedPose> fixed_pose;
  bool operator==(const ElementSpec&) const = default;
};

/// Dotted element path plus port id, e.g. {"battery.block2", "out"}.
struct PortRef {
  std::string element;
  std::string port;
  bool operator==(const PortRef&) const = default;
  [[nodiscard]] std::string str() const { return element + "." + port; }
};

struct Connection {
  PortRef from;
  PortRef to;
  bool operator==(const Connection&) const = default;
};

/// Level-0 parent rectangle, centered at the origin.
struct DesignSpace {
  double width = 0.0;
  double length = 0.0;
  bool operator==(const DesignSpace&) const = default;
};

struct GroupingDirective {
  std::string subsystem;  // dotted path
  int blocks = 1;
  bool operator==(const GroupingDirective&) const = default;
};

struct SystemDescription {
  DesignSpace design_space;
  std::vector<ElementSpec> elements;
  std::vector<Connection> connections;
  std::vector<GroupingDirective> grouping;
  bool operator==(const SystemDescription&) const = default;
};

struct Issue {
  std::string code;
  std::string message;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Issue> issues);
  [[nodiscard]] const std::vector<Issue>& issues() const { return issues_; }
  [[nodiscard]] bool has(const std::string& code) const;

 private:
  std::vector<Issue> issues_;
};

// ---------------------------------------------------------------------------
// Validated, flattened hierarchy
// ---------------------------------------------------------------------------

struct ElementNode {
  std::string id;
  std::string path;
  ElementKind kind = ElementKind::component;
  int level = 0;        // 0 for elements directly inside the design space
  int parent = -1;      // -1 for the design space
  int sibling_index = 0;
  std::vector<int> children;
  std::vector<int> ports;
  double default_width = 0.0;
  double default_length = 0.0;
  std::optional<FixedPose> fixed_pose;

  [[nodiscard]] bool is_component() const { return kind == ElementKind::component; }
};

struct PortNode {
  std::string id;
  std::string path;  // element path + "." + port id
  int element = -1;
  EnergyDomain domain = EnergyDomain::electrical;
  ConnectionKind connection_kind = ConnectionKind::indirect;
  Offset default_offset;             // components only
  std::optional<Edge> default_edge;  // mechanical component ports
};

/// Unordered same-parent element pair. `i` precedes `j` in declaration order;
/// `index` is unique within the parent.
struct InterferencePair {
  int parent = -1;
  int i = -1;
  int j = -1;
  int index = 0;
};

struct ConnectionNode {
  int from_port = -1;
  int to_port = -1;
  EnergyDomain domain = EnergyDomain::electrical;
  bool same_level = true;
  bool direct = false;
  int level = 0;     // level of the upper endpoint
  int pair = -1;     // same-level sibling pair, index into ValidatedSystem::pairs
  int upper_port = -1;  // inter-level: the subsystem-side port
  int lower_port = -1;  // inter-level: the child-side port
};

/// The relative-placement pair whose binaries steer a mechanical port and the
/// column set to read for it.
struct AlignmentContext {
  int pair = -1;
  Perspective perspective = Perspective::ego;
};

struct ValidatedSystem {
  DesignSpace design_space;
  std::vector<ElementNode> elements;  // depth-first declaration order
  std::vector<PortNode> ports;
  std::vector<ConnectionNode> connections;
  std::vector<InterferencePair> pairs;
  std::vector<std::optional<AlignmentContext>> alignment;  // per port
  std::vector<int> top_level;
  int n_levels = 0;  // deepest level index

  [[nodiscard]] std::optional<int> find_element(const std::string& path) const;
  [[nodiscard]] std::optional<int> find_port(const std::string& element_path, const std::string& port) const;
  [[nodiscard]] std::vector<int> elements_at_level(int level) const;
  [[nodiscard]] std::vector<int> subsystems() const;
  /// Children of `parent`, or the top-level elements for parent -1.
  [[nodiscard]] const std::vector<int>& children_of(int parent) const;
  [[nodiscard]] std::vector<int> pairs_of(int parent) const;
  [[nodiscard]] std::optional<int> pair_between(int a, int b) const;
};

/// Element footprint edge that a port offset lies on, if exactly one.
[[nodiscard]] std::optional<Edge> boundary_edge(double width, double length, Offset offset, double tol = 1e-9);

/// Checks the hierarchy and connection structure; throws ValidationError with
/// every issue found.
[[nodiscard]] ValidatedSystem validate(const SystemDescription& description);

/// All unordered pairs among the children of `parent` (-1: top level), in
/// canonical order (i before j by declaration, lexicographic).
[[nodiscard]] std::vector<InterferencePair> interference_pairs(const ValidatedSystem& system, int parent);

/// Replaces a series chain of k identical components inside each named
/// subsystem by `blocks` composite components laid out as rows.
[[nodiscard]] SystemDescription group_elements(const SystemDescription& description,
                                               const std::vector<GroupingDirective>& directives);

}  // namespace ptlayout
