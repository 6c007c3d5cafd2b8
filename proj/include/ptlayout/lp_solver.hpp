#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptlayout/milp_model.hpp"

namespace ptlayout::milp {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical };

[[nodiscard]] std::string to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;             // structural values
  double objective = 0.0;
  std::vector<double> row_duals;     // y_i, sign convention: c - A^T y = reduced costs
  std::vector<double> reduced_costs; // per structural column
  std::int64_t iterations = 0;
};

struct LpTolerances {
  double primal = 1e-7;
  double dual = 1e-9;
  double pivot = 1e-9;
};

/// Opaque copy of a simplex basis, used to warm-start related solves.
struct LpBasis {
  std::vector<int> basic;            // variable basic in each row
  std::vector<std::uint8_t> status;  // per variable, engine-internal
};

/// Bounded-variable simplex on a dense tableau.
///
/// Rows are stored as `A x - s = 0` with one logical `s_i` per row carrying the
/// row bounds, so a basis change never touches the right-hand side. The engine
/// keeps its basis between calls: changing variable bounds and calling
/// `solve()` again re-optimizes with the dual simplex from the previous basis,
/// which is how branch-and-bound reuses work between nodes. A fresh engine
/// whose starting basis is not dual feasible runs a zero-cost dual phase to
/// reach primal feasibility followed by primal simplex.
///
/// Binary variables are treated as continuous in [lower, upper].
class LpEngine {
 public:
  explicit LpEngine(const MilpModel& model, LpTolerances tol = {});

  void set_bounds(int var, double lower, double upper);
  void reset_bounds();
  /// Solves stop with iteration_limit once this point has passed.
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) { deadline_ = deadline; }
  [[nodiscard]] double lower(int var) const { return lo_[static_cast<std::size_t>(var)]; }
  [[nodiscard]] double upper(int var) const { return hi_[static_cast<std::size_t>(var)]; }

  LpSolution solve(std::int64_t iteration_limit = 1'000'000);
  [[nodiscard]] LpBasis basis() const;
  /// Installs a basis taken from an engine over the same model and
  /// refactors. Falls back to the slack basis if it is singular.
  void set_basis(const LpBasis& basis);

  [[nodiscard]] int num_structural() const { return n_; }
  [[nodiscard]] int num_rows() const { return m_; }
  [[nodiscard]] std::int64_t total_iterations() const { return total_iterations_; }
  [[nodiscard]] int refactor_count() const { return refactors_; }

 private:
  enum class NonbasicAt : std::uint8_t { lower, upper, zero, basic };

  [[nodiscard]] double& tab(int row, int col) { return tableau_[static_cast<std::size_t>(row) * cols_ + static_cast<std::size_t>(col)]; }
  [[nodiscard]] double tab(int row, int col) const { return tableau_[static_cast<std::size_t>(row) * cols_ + static_cast<std::size_t>(col)]; }

  void place_nonbasic(int k, bool prefer_dual_feasible);
  void recompute_basic_values();
  void recompute_reduced_costs(const std::vector<double>& cost);
  [[nodiscard]] bool dual_feasible() const;
  void pivot(int row, int col);
  [[nodiscard]] bool past_deadline() const;
  [[nodiscard]] bool confirm_infeasible(int row);
  bool refactor();
  [[nodiscard]] double residual() const;

  // Each returns true when it terminated normally (optimal or proven status).
  LpStatus dual_simplex(std::int64_t& budget);
  LpStatus primal_simplex(std::int64_t& budget);

  LpSolution extract(LpStatus status);

  const MilpModel* model_;
  LpTolerances tol_;
  int n_ = 0;
  int m_ = 0;
  std::size_t cols_ = 0;

  // Sparse copy of the structural matrix, by column and by row.
  std::vector<std::vector<Term>> col_entries_;
  std::vector<std::vector<Term>> row_entries_;

  std::vector<double> cost_;      // size n + m, logicals zero
  std::vector<double> base_lo_;   // model bounds
  std::vector<double> base_hi_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<double> x_;         // values of all n + m variables
  std::vector<double> d_;         // reduced costs for the active cost vector
  std::vector<int> basis_;        // variable basic in each row
  std::vector<int> row_of_;       // row index if basic, -1 otherwise
  std::vector<NonbasicAt> state_;
  std::vector<double> tableau_;   // B^{-1} [A -I], row-major m x (n + m)

  std::int64_t total_iterations_ = 0;
  std::int64_t pivots_since_refactor_ = 0;
  int refactors_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  int unconfirmed_ = 0;
  int degenerate_run_ = 0;  // consecutive degenerate pivots in this solve  // infeasibility proofs rejected during this solve
};

/// One-shot LP solve of `model` with binaries relaxed to their bounds.
[[nodiscard]] LpSolution solve_lp(const MilpModel& model);

}  // namespace ptlayout::milp
