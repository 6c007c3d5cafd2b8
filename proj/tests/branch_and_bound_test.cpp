#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ptlayout/branch_and_bound.hpp"

using namespace ptlayout::milp;

namespace {

// Random mixed model: a few continuous variables and up to 8 binaries tied
// together by big-M style rows.
MilpModel random_mip(std::mt19937& rng, int binaries, int continuous, int rows) {
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  MilpModel model;
  for (int j = 0; j < continuous; ++j) {
    const int v = model.add_variable("c" + std::to_string(j), -5.0, 5.0);
    model.set_objective(v, u(rng));
  }
  for (int j = 0; j < binaries; ++j) {
    const int v = model.add_binary("b" + std::to_string(j));
    model.set_objective(v, u(rng));
  }
  const int n = continuous + binaries;
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j)
      if (rng() % 2) terms.push_back({j, std::round(u(rng) * 2) / 2});
    const bool le = rng() % 2;
    model.add_row("r" + std::to_string(i), terms, le ? Sense::less_equal : Sense::greater_equal,
                  le ? 2.0 + std::abs(u(rng)) : -2.0 - std::abs(u(rng)));
  }
  return model;
}

// Exhaustive oracle: LP for every binary assignment.
std::optional<double> enumerate(const MilpModel& model) {
  const std::vector<int> bins = model.binary_vars();
  std::optional<double> best;
  for (unsigned mask = 0; mask < (1u << bins.size()); ++mask) {
    MilpModel fixed = model;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const double v = (mask >> k) & 1u;
      fixed.var(bins[k]).lower = v;
      fixed.var(bins[k]).upper = v;
    }
    const LpSolution sol = solve_lp(fixed);
    if (sol.status == LpStatus::optimal && (!best || sol.objective < *best)) best = sol.objective;
  }
  return best;
}

}  // namespace

TEST_CASE("binaries fixed by equality rows reduce to the LP") {
  MilpModel model;
  const int x = model.add_variable("x", 0.0, 10.0);
  const int b = model.add_binary("b");
  model.set_objective(x, 1.0);
  model.set_objective(b, 3.0);
  model.add_row("fix", {{b, 1.0}}, Sense::equal, 1.0);
  model.add_row("link", {{x, 1.0}, {b, -2.0}}, Sense::greater_equal, 0.5);
  const MipSolution mip = branch_and_bound(model);
  const LpSolution lp = solve_lp(model);
  REQUIRE(mip.status == MipStatus::optimal);
  CHECK(mip.objective == doctest::Approx(lp.objective));
  CHECK(mip.objective == doctest::Approx(5.5));
}

TEST_CASE("random small MIPs match exhaustive enumeration") {
  std::mt19937 rng(21);
  int feasible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const MilpModel model = random_mip(rng, 2 + static_cast<int>(rng() % 7), 2, 3 + static_cast<int>(rng() % 3));
    const auto expected = enumerate(model);
    SolveOptions opt;
    opt.record_bound_trace = true;
    const MipSolution mip = branch_and_bound(model, opt);
    if (!expected) {
      CHECK(mip.status == MipStatus::infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(mip.status == MipStatus::optimal);
    CHECK(mip.objective == doctest::Approx(*expected).epsilon(1e-6));
    CHECK(mip.bound <= mip.objective + 1e-9);
    CHECK(verify_assignment(model, mip.x).empty());
    for (std::size_t k = 1; k < mip.bound_trace.size(); ++k) CHECK(mip.bound_trace[k] >= mip.bound_trace[k - 1] - 1e-9);
  }
  CHECK(feasible > 20);
}

TEST_CASE("deterministic mode repeats the node sequence") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MilpModel model = random_mip(rng, 8, 3, 5);
    SolveOptions opt;
    opt.record_bound_trace = true;
    const MipSolution a = branch_and_bound(model, opt);
    const MipSolution b = branch_and_bound(model, opt);
    CHECK(a.nodes == b.nodes);
    CHECK(a.x == b.x);
    CHECK(a.bound_trace == b.bound_trace);
  }
}

TEST_CASE("node limit returns the best incumbent so far") {
  std::mt19937 rng(9);
  const MilpModel model = random_mip(rng, 8, 2, 4);
  SolveOptions opt;
  opt.node_limit = 1;
  opt.use_heuristic = false;
  const MipSolution mip = branch_and_bound(model, opt);
  CHECK(mip.nodes <= 1);
  CHECK((mip.status == MipStatus::node_limit || mip.status == MipStatus::optimal ||
         mip.status == MipStatus::infeasible));
}

TEST_CASE("verify_assignment reports rows, bounds and integrality") {
  MilpModel model;
  const int x = model.add_variable("x", 0.0, 1.0);
  const int b = model.add_binary("b");
  model.add_row("eq5/0/u~v/a", {{x, 1.0}, {b, 1.0}}, Sense::less_equal, 1.0);
  CHECK(verify_assignment(model, {0.5, 0.0}).empty());
  const auto report = verify_assignment(model, {1.5, 0.5});
  REQUIRE(report.size() == 3);
  CHECK(report[0].tag == "bound:x");
  CHECK(report[1].tag == "integrality:b");
  CHECK(report[2].tag == "eq5/0/u~v/a");
  CHECK(report[2].residual == doctest::Approx(1.0));
}
