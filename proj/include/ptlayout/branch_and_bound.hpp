#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ptlayout/lp_solver.hpp"
#include "ptlayout/milp_model.hpp"

namespace ptlayout::milp {

/// `optimal` means the relative gap is within SolveOptions::gap.
enum class MipStatus { optimal, infeasible, node_limit, time_limit, numerical };

[[nodiscard]] std::string to_string(MipStatus status);

struct SolveOptions {
  double gap = 1e-6;  // relative: (objective - bound) / max(1, |objective|)
  std::int64_t node_limit = 1'000'000;
  double time_limit_seconds = 0.0;  // 0: none
  bool deterministic = true;
  bool record_bound_trace = false;
  bool use_heuristic = true;
};

struct MipSolution {
  MipStatus status = MipStatus::infeasible;
  std::vector<double> x;  // incumbent, empty when none
  double objective = kInfinity;
  double bound = -kInfinity;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  double seconds = 0.0;
  std::vector<double> bound_trace;  // global lower bound after each node

  [[nodiscard]] bool has_incumbent() const { return !x.empty(); }
  [[nodiscard]] double gap() const;
};

/// Problem-specific primal heuristic. Given a fractional node solution, it may
/// propose values for the binaries; the solver fixes them, re-solves the LP and
/// accepts the result only if it passes verify_assignment.
using BinaryProposal = std::function<std::optional<std::vector<double>>(const std::vector<double>& lp_x)>;

/// Best-first branch-and-bound over the binary variables. In deterministic
/// mode nodes are ordered by bound then creation id and the branching variable
/// is the most fractional binary, ties by lowest index.
[[nodiscard]] MipSolution branch_and_bound(const MilpModel& model, const SolveOptions& options = {},
                                           const BinaryProposal& heuristic = {});

struct Violation {
  std::string tag;       // row tag, or "bound:<var>" / "integrality:<var>"
  double residual = 0.0;
};

/// Every row, bound and integrality requirement violated by `x` by more than
/// `tol` (absolute).
[[nodiscard]] std::vector<Violation> verify_assignment(const MilpModel& model, const std::vector<double>& x,
                                                       double tol = 1e-6);

}  // namespace ptlayout::milp
