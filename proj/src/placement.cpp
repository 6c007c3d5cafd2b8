#include "ptlayout/placement.hpp"

namespace ptlayout {

PlacementRun solve_placement(const ValidatedSystem& system, const FormulationOptions& formulation,
                             const milp::SolveOptions& solve) {
  PlacementRun run;
  run.formulation = build_formulation(system, formulation);
  milp::BinaryProposal heuristic;
  if (solve.use_heuristic) heuristic = placement_heuristic(system, run.formulation);
  run.mip = milp::branch_and_bound(run.formulation.model, solve, heuristic);
  if (!run.mip.has_incumbent()) return run;
  run.violations = milp::verify_assignment(run.formulation.model, run.mip.x);
  PlacementSolution s = decode_solution(system, run.formulation, run.mip.x);
  s.stats.status = milp::to_string(run.mip.status);
  s.stats.objective = run.mip.objective;
  s.stats.bound = run.mip.bound;
  s.stats.gap = run.mip.gap();
  s.stats.nodes = run.mip.nodes;
  s.stats.lp_iterations = run.mip.lp_iterations;
  s.stats.seconds = run.mip.seconds;
  run.solution = std::move(s);
  return run;
}

}  // namespace ptlayout
