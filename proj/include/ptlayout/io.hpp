#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ptlayout/formulation.hpp"
#include "ptlayout/milp_model.hpp"
#include "ptlayout/system.hpp"

namespace ptlayout::io {

/// Parses a .system document (JSON). Problems are reported as a
/// ValidationError whose messages name the offending field as a JSON pointer,
/// or the line and column for syntax errors.
[[nodiscard]] SystemDescription parse_system(const std::string& text);
[[nodiscard]] SystemDescription read_system_file(const std::string& path);
[[nodiscard]] std::string serialize_system(const SystemDescription& description);

/// Free-format MPS with integer markers, explicit bounds and, when the model
/// has a quadratic objective, a QUADOBJ section. Numbers use 9 significant
/// digits.
void write_mps(std::ostream& out, const milp::MilpModel& model, const std::string& name = "ptlayout");
[[nodiscard]] std::string to_mps(const milp::MilpModel& model, const std::string& name = "ptlayout");

/// Reads the subset of free MPS produced by write_mps.
[[nodiscard]] milp::MilpModel read_mps(std::istream& in);

/// Timing is left out unless requested so that repeated runs produce the
/// same bytes.
[[nodiscard]] std::string serialize_solution(const PlacementSolution& solution, bool include_timing = false);
[[nodiscard]] PlacementSolution parse_solution(const std::string& text);

/// Only the "variables" table of a solution document. Lets external solver
/// output be checked without the decoded geometry.
[[nodiscard]] std::vector<std::pair<std::string, double>> parse_variables(const std::string& text);

/// Model assignment from the solution's variable table; throws
/// std::invalid_argument when a model variable is missing.
[[nodiscard]] std::vector<double> assignment_from(const milp::MilpModel& model, const PlacementSolution& solution);
[[nodiscard]] std::vector<double> assignment_from(const milp::MilpModel& model,
                                                  const std::vector<std::pair<std::string, double>>& variables);

/// SVG drawing with 1 user unit per length unit and y pointing forward.
/// Throws std::invalid_argument when the placement fails the geometric audit.
[[nodiscard]] std::string render_svg(const ValidatedSystem& system, const PlacementSolution& solution);

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] std::string exact(double v);

[[nodiscard]] std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace ptlayout::io
