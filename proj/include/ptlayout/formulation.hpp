#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ptlayout/branch_and_bound.hpp"
#include "ptlayout/milp_model.hpp"
#include "ptlayout/system.hpp"

namespace ptlayout {

enum class ObjectiveMode { l1, squared_euclidean };

[[nodiscard]] std::string to_string(ObjectiveMode mode);

struct BigM {
  double value = 0.0;
};

/// W + L of the design space. Large enough to relax every disjunctive row
/// once all elements sit inside the design space.
[[nodiscard]] BigM compute_big_m(const DesignSpace& space);

/// Required value of one orientation binary as a function of the pair
/// binaries (p, q).
enum class Logic { free, p, not_p, q, not_q, p_xor_q, p_xnor_q };

[[nodiscard]] std::string to_string(Logic logic);
[[nodiscard]] std::optional<bool> evaluate(Logic logic, bool p, bool q);

struct OrientationLogic {
  Logic m = Logic::free;
  Logic n = Logic::free;
  Logic r = Logic::free;
  bool operator==(const OrientationLogic&) const = default;
};

/// Concrete (m, n, r) values for one placement; nullopt marks a free binary.
struct OrientationRequirement {
  std::optional<bool> m;
  std::optional<bool> n;
  std::optional<bool> r;
  bool operator==(const OrientationRequirement&) const = default;
};

/// Logic that turns a port on `default_edge` toward the neighbour selected by
/// (p, q). The connecting perspective reads the column of the opposite edge.
[[nodiscard]] OrientationLogic orientation_logic(Edge default_edge, Perspective perspective);
[[nodiscard]] OrientationRequirement derive_orientation(Edge default_edge, bool p, bool q, Perspective perspective);

/// Edge that a port of an element must face for the given pair placement.
[[nodiscard]] Edge facing_edge(bool p, bool q, Perspective perspective);

struct ElementVars {
  int x = -1, y = -1, w = -1, l = -1;
  int r = -1, m = -1, n = -1;  // components only
};

struct PortVars {
  int a = -1, b = -1;
};

struct PairVars {
  int p = -1, q = -1;
};

struct ConnectionVars {
  int tx = -1, ty = -1;  // l1: |dx|, |dy| upper envelopes
  int dx = -1, dy = -1;  // squared-euclidean: signed differences
};

/// Model variable ids for every symbol, indexed like the ValidatedSystem
/// vectors.
struct VariableMap {
  std::vector<ElementVars> elements;
  std::vector<PortVars> ports;
  std::vector<PairVars> pairs;
  std::vector<ConnectionVars> connections;
};

struct FormulationOptions {
  ObjectiveMode objective = ObjectiveMode::l1;
  std::optional<double> big_m;  // defaults to compute_big_m
};

struct Formulation {
  milp::MilpModel model;
  VariableMap vars;
  double big_m = 0.0;
  ObjectiveMode mode = ObjectiveMode::l1;
};

[[nodiscard]] Formulation build_formulation(const ValidatedSystem& system, const FormulationOptions& options = {});

/// Row tag prefix for a constraint family, e.g. "eq5". Rows are sorted by
/// this prefix, keeping emission order inside a family.
[[nodiscard]] std::string row_family(const std::string& tag);

// ---------------------------------------------------------------------------
// Decoded solution
// ---------------------------------------------------------------------------

struct ElementPlacement {
  std::string path;
  ElementKind kind = ElementKind::component;
  double x = 0, y = 0, w = 0, l = 0;
  std::optional<bool> m, n, r;  // components only
};

struct PortPlacement {
  std::string path;
  double a = 0, b = 0;  // relative to the element center
  double x = 0, y = 0;  // absolute
};

struct ConnectionRoute {
  std::string from;
  std::string to;
  EnergyDomain domain = EnergyDomain::electrical;
  bool direct = false;
  double dx = 0, dy = 0;
  double length_l1 = 0;
  double length_euclidean = 0;
};

struct SolverStats {
  std::string status;
  double objective = 0;
  double bound = 0;
  double gap = 0;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  double seconds = 0;
};

struct PlacementSolution {
  DesignSpace design_space;
  std::vector<ElementPlacement> elements;
  std::vector<PortPlacement> ports;
  std::vector<ConnectionRoute> connections;
  double j_con = 0;
  double j_dim = 0;
  ObjectiveMode mode = ObjectiveMode::l1;
  SolverStats stats;
  std::vector<std::pair<std::string, double>> variables;  // full assignment by name
};

[[nodiscard]] PlacementSolution decode_solution(const ValidatedSystem& system, const Formulation& formulation,
                                                const std::vector<double>& x);

/// Primal heuristic for branch_and_bound: reads pair placements and
/// orientations off a relaxed solution and proposes a consistent binary set.
[[nodiscard]] milp::BinaryProposal placement_heuristic(const ValidatedSystem& system, const Formulation& formulation);

}  // namespace ptlayout
