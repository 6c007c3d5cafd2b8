#pragma once

#include <array>
#include <string>
#include <vector>

#include "ptlayout/branch_and_bound.hpp"
#include "ptlayout/formulation.hpp"
#include "ptlayout/system.hpp"

namespace ptlayout::oracle {

struct OrientationState {
  bool m = false;
  bool n = false;
  bool r = false;
  bool operator==(const OrientationState&) const = default;
};

/// All eight states, index = 4m + 2n + r.
[[nodiscard]] std::array<OrientationState, 8> all_states();

struct SimulatedPort {
  Edge edge = Edge::top;
  Offset offset;
};

/// Offset of a point of the body after the orientation change.
[[nodiscard]] Offset transform_offset(Offset offset, OrientationState state);

/// Mirrors the body (m: across its vertical centerline, n: across its
/// horizontal centerline) and then turns it a quarter clockwise when r is set.
/// Throws std::invalid_argument ("port not on boundary") when the offset does
/// not point out of `default_edge`.
[[nodiscard]] SimulatedPort simulate_orientation(Edge default_edge, Offset default_offset, OrientationState state);

/// Edge an element must present toward its pair neighbour.
[[nodiscard]] Edge required_edge(bool p, bool q, Perspective perspective);

struct TruthTables {
  // [edge][2p + q], ego perspective, edges in Edge declaration order
  std::array<std::array<OrientationRequirement, 4>, 4> table;
  // logic per edge inferred from the table (ego perspective)
  std::array<OrientationLogic, 4> logic;
  // all satisfying states per cell, for diagnostics
  std::array<std::array<std::vector<OrientationState>, 4>, 4> states;
};

/// Rebuilds the orientation truth table by searching the eight states for
/// every edge and relative placement, then names each column as a logic
/// function of (p, q).
[[nodiscard]] TruthTables regenerate_truth_tables(Perspective perspective = Perspective::ego);

/// Reference orientation table as commonly quoted (ego perspective), kept
/// for comparison. It contains one wrong cell.
[[nodiscard]] std::array<std::array<OrientationRequirement, 4>, 4> printed_truth_table();

struct TableDifference {
  Edge edge = Edge::top;
  bool p = false, q = false;
  OrientationRequirement printed;
  OrientationRequirement derived;
};

[[nodiscard]] std::vector<TableDifference> compare_with_printed(const TruthTables& tables);

/// Logic encoded by the reference linear rows, per edge. The Right edge rows
/// encode XOR where the geometry needs XNOR.
[[nodiscard]] std::array<OrientationLogic, 4> printed_row_logic();

struct LogicDifference {
  Edge edge = Edge::top;
  OrientationLogic printed;
  OrientationLogic derived;
};

[[nodiscard]] std::vector<LogicDifference> compare_with_printed_rows(const TruthTables& tables);

// ---------------------------------------------------------------------------

inline constexpr int kEnumerationCap = 24;

struct Enumeration {
  milp::MipSolution best;
  std::vector<std::vector<double>> feasible;  // binary values, one entry per free binary
  std::vector<double> objectives;             // matching `feasible`
  std::vector<int> binaries;                  // model ids of the free binaries
};

/// Solves the LP for every assignment of the free binaries. Fixed binaries
/// (equal bounds) are kept. Throws std::invalid_argument above the cap.
[[nodiscard]] Enumeration enumerate_optimal(const milp::MilpModel& model);

/// Free-binary assignments whose objective lies within `tol` (relative) of
/// the best one.
[[nodiscard]] std::vector<std::vector<double>> optimal_assignments(const Enumeration& e, double tol = 1e-6);

// ---------------------------------------------------------------------------

struct AuditIssue {
  std::string kind;  // overlap, containment, shaft, facing, direct, dimensions, port-transform
  std::string subject;
  double residual = 0.0;
};

/// Geometric check of a decoded placement that does not consult the model:
/// interior-disjoint siblings, containment, axis-parallel shafts leaving
/// through the port's own edge, coincident direct ports, component
/// dimensions and port offsets consistent with the reported orientation.
[[nodiscard]] std::vector<AuditIssue> audit_layout(const ValidatedSystem& system, const PlacementSolution& solution,
                                                   double tol = 1e-6);

}  // namespace ptlayout::oracle
