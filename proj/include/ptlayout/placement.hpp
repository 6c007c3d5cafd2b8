#pragma once

#include <optional>

#include "ptlayout/branch_and_bound.hpp"
#include "ptlayout/formulation.hpp"
#include "ptlayout/system.hpp"

namespace ptlayout {

struct PlacementRun {
  Formulation formulation;
  milp::MipSolution mip;
  std::optional<PlacementSolution> solution;  // set whenever there is an incumbent
  std::vector<milp::Violation> violations;    // re-verification of the incumbent
};

/// Build, solve with the placement heuristic, decode and re-verify.
[[nodiscard]] PlacementRun solve_placement(const ValidatedSystem& system, const FormulationOptions& formulation = {},
                                           const milp::SolveOptions& solve = {});

}  // namespace ptlayout
