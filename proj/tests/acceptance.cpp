// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// budgets are fixed here and are not configurable.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ptlayout/io.hpp"
#include "ptlayout/oracle.hpp"
#include "ptlayout/placement.hpp"
#include "toy_systems.hpp"

using namespace ptlayout;
using namespace toys;
namespace fs = std::filesystem;

namespace {

constexpr double kRelTol = 1e-6;        // objective agreement with enumeration
constexpr double kLengthTol = 1e-6;     // geometric residuals, length units
constexpr double kCaseStudyGap = 1e-4;  // relative gap for the case study
constexpr double kCaseStudyBudget = 600.0;
constexpr int kToyCount = 48;
constexpr int kMaxToyBinaries = 12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// The toy suite shared by criteria 3, 4 and 7.
std::vector<SystemDescription> toy_suite() {
  std::mt19937 rng(2024);
  std::vector<SystemDescription> out;
  while (static_cast<int>(out.size()) < kToyCount) out.push_back(random_toy(rng, kMaxToyBinaries));
  return out;
}

int free_binaries(const milp::MilpModel& model) {
  int k = 0;
  for (int v : model.binary_vars()) k += model.var(v).lower != model.var(v).upper;
  return k;
}

std::string run_capture(const std::string& command, int& status) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  status = pclose(pipe);
  return out;
}

// ---------------------------------------------------------------------------

Outcome truth_tables() {
  Outcome o;
  const auto t0 = Clock::now();
  const oracle::TruthTables t = oracle::regenerate_truth_tables();
  const OrientationLogic want[4] = {{Logic::free, Logic::q, Logic::p},
                                    {Logic::free, Logic::not_q, Logic::p},
                                    {Logic::p_xnor_q, Logic::free, Logic::not_p},
                                    {Logic::p_xor_q, Logic::free, Logic::not_p}};
  for (int e = 0; e < 4; ++e) {
    if (!(t.logic[static_cast<std::size_t>(e)] == want[e])) o.fail("logic mismatch on edge " + std::to_string(e));
  }
  // Right edge, (p, q) = (0, 0): mirror and quarter turn
  const OrientationRequirement right00 = t.table[2][0];
  if (right00.m != std::optional<bool>(true) || right00.r != std::optional<bool>(true) || right00.n) {
    o.fail("worked example: Right (0,0) is not (m, r) = (1, 1)");
  }
  const auto cells = oracle::compare_with_printed(t);
  if (cells.size() != 1 || cells[0].edge != Edge::left || !cells[0].p || !cells[0].q) {
    o.fail("expected exactly the Left (1,1) cell to be flagged");
  }
  const auto rows = oracle::compare_with_printed_rows(t);
  if (rows.size() != 1 || rows[0].edge != Edge::right) o.fail("expected exactly the Right edge rows to be flagged");
  const double s = seconds_since(t0);
  if (s >= 1.0) o.fail("took " + fmt(s) + " s");
  if (o.pass) o.detail = "8 logic entries match, 2 errata flagged, " + fmt(s) + " s";
  return o;
}

Outcome orientation_completeness() {
  Outcome o;
  const auto t0 = Clock::now();
  // 2 x 1 body, shaft on the right edge and a second port on the top edge,
  // both off-center so no symmetry can merge states
  const Offset shaft{1.0, 0.3};
  const Offset second{-0.4, 0.5};
  std::set<std::pair<std::pair<double, double>, std::pair<double, double>>> seen;
  for (const auto& s : oracle::all_states()) {
    const oracle::SimulatedPort a = oracle::simulate_orientation(Edge::right, shaft, s);
    const oracle::SimulatedPort b = oracle::simulate_orientation(Edge::top, second, s);
    seen.insert({{a.offset.a, a.offset.b}, {b.offset.a, b.offset.b}});
  }
  const double s = seconds_since(t0);
  if (seen.size() != 8) o.fail(std::to_string(seen.size()) + " distinct placements");
  if (s >= 1.0) o.fail("took " + fmt(s) + " s");
  if (o.pass) o.detail = "8 distinct two-port placements, " + fmt(s) + " s";
  return o;
}

Outcome oracle_equivalence(const std::vector<SystemDescription>& toys) {
  Outcome o;
  const auto t0 = Clock::now();
  int feasible = 0, infeasible = 0;
  for (std::size_t k = 0; k < toys.size(); ++k) {
    const std::string who = "toy " + std::to_string(k) + ": ";
    const ValidatedSystem sys = validate(toys[k]);
    const Formulation f = build_formulation(sys);
    if (free_binaries(f.model) > kMaxToyBinaries) {
      o.fail(who + "too many binaries");
      continue;
    }
    const oracle::Enumeration e = oracle::enumerate_optimal(f.model);
    const milp::MipSolution mip = milp::branch_and_bound(f.model, {}, placement_heuristic(sys, f));
    if (!e.best.has_incumbent()) {
      ++infeasible;
      if (mip.status != milp::MipStatus::infeasible) o.fail(who + "enumeration infeasible, solver not");
      continue;
    }
    ++feasible;
    if (mip.status != milp::MipStatus::optimal) {
      o.fail(who + "solver status " + milp::to_string(mip.status));
      continue;
    }
    const double rel = std::abs(mip.objective - e.best.objective) / std::max(1.0, std::abs(e.best.objective));
    if (rel > kRelTol) o.fail(who + "objective " + fmt(mip.objective) + " vs " + fmt(e.best.objective));
    std::vector<double> chosen;
    for (int v : e.binaries) chosen.push_back(std::round(mip.x[static_cast<std::size_t>(v)]));
    const auto optimal = oracle::optimal_assignments(e, kRelTol);
    if (std::find(optimal.begin(), optimal.end(), chosen) == optimal.end()) {
      o.fail(who + "solver binaries are not among the enumerated optima");
    }
  }
  const double s = seconds_since(t0);
  if (feasible < 20) o.fail("only " + std::to_string(feasible) + " feasible toys");
  if (s >= 120.0) o.fail("took " + fmt(s) + " s");
  if (o.pass) {
    o.detail = std::to_string(feasible) + " feasible + " + std::to_string(infeasible) + " infeasible toys agree, " +
               fmt(s) + " s";
  }
  return o;
}

Outcome feasibility_invariants(const std::vector<SystemDescription>& toys) {
  Outcome o;
  std::vector<SystemDescription> all{motor_gearbox(), nested_drive()};
  all.insert(all.end(), toys.begin(), toys.end());
  int checked = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const ValidatedSystem sys = validate(all[k]);
    const PlacementRun run = solve_placement(sys);
    if (!run.solution) continue;
    ++checked;
    const auto rows = milp::verify_assignment(run.formulation.model, run.mip.x, kLengthTol);
    if (!rows.empty()) o.fail("system " + std::to_string(k) + ": " + rows[0].tag + " off by " + fmt(rows[0].residual));
    const auto geo = oracle::audit_layout(sys, *run.solution, kLengthTol);
    if (!geo.empty()) o.fail("system " + std::to_string(k) + ": " + geo[0].kind + " " + geo[0].subject);
  }
  if (o.pass) o.detail = std::to_string(checked) + " solutions pass row verification and the geometric audit";
  return o;
}

Outcome case_study() {
  Outcome o;
  SystemDescription d = io::read_system_file(PTLAYOUT_DATA_DIR "/fig1.system");
  std::vector<GroupingDirective> directives = d.grouping;
  directives.push_back({"battery", 4});
  d = group_elements(d, directives);
  const ValidatedSystem sys = validate(d);

  milp::SolveOptions opt;
  opt.gap = kCaseStudyGap;
  opt.time_limit_seconds = kCaseStudyBudget;
  const auto t0 = Clock::now();
  const PlacementRun run = solve_placement(sys, {}, opt);
  const double s = seconds_since(t0);
  if (!run.solution) {
    o.fail("no solution after " + fmt(s) + " s (" + milp::to_string(run.mip.status) + ")");
    return o;
  }
  const PlacementSolution& sol = *run.solution;
  if (run.mip.status != milp::MipStatus::optimal) {
    o.fail(milp::to_string(run.mip.status) + " after " + fmt(s) + " s, objective " + fmt(run.mip.objective) +
           ", bound " + fmt(run.mip.bound) + ", gap " + fmt(run.mip.gap()));
  }
  if (s > kCaseStudyBudget) o.fail("took " + fmt(s) + " s");
  if (!run.violations.empty()) o.fail("row " + run.violations[0].tag + " violated");

  int shafts = 0, direct = 0;
  for (const ConnectionRoute& c : sol.connections) {
    if (c.domain != EnergyDomain::mechanical) continue;
    ++shafts;
    if (std::min(std::abs(c.dx), std::abs(c.dy)) > kLengthTol) o.fail("shaft " + c.from + " -> " + c.to + " is skewed");
    if (c.direct) {
      ++direct;
      if (std::max(std::abs(c.dx), std::abs(c.dy)) > kLengthTol) o.fail("direct " + c.from + " ports apart");
    }
  }
  if (direct == 0) o.fail("no direct connection in the case study");

  int boxes = 0;
  for (int sub : sys.subsystems()) {
    ++boxes;
    const ElementPlacement& b = sol.elements[static_cast<std::size_t>(sub)];
    double lo_x = INFINITY, hi_x = -INFINITY, lo_y = INFINITY, hi_y = -INFINITY;
    for (int c : sys.elements[static_cast<std::size_t>(sub)].children) {
      const ElementPlacement& e = sol.elements[static_cast<std::size_t>(c)];
      lo_x = std::min(lo_x, e.x - e.w / 2);
      hi_x = std::max(hi_x, e.x + e.w / 2);
      lo_y = std::min(lo_y, e.y - e.l / 2);
      hi_y = std::max(hi_y, e.y + e.l / 2);
    }
    const double slack = std::max({std::abs(lo_x - (b.x - b.w / 2)), std::abs(hi_x - (b.x + b.w / 2)),
                                   std::abs(lo_y - (b.y - b.l / 2)), std::abs(hi_y - (b.y + b.l / 2))});
    if (slack > kLengthTol) o.fail("subsystem " + b.path + " box is loose by " + fmt(slack));
  }
  if (boxes != 3) o.fail(std::to_string(boxes) + " subsystems instead of 3");
  const auto geo = oracle::audit_layout(sys, sol, kLengthTol);
  if (!geo.empty()) o.fail("audit: " + geo[0].kind + " " + geo[0].subject);
  if (o.pass) {
    o.detail = "optimal " + fmt(run.mip.objective) + " in " + fmt(s) + " s, " + std::to_string(shafts) +
               " axis-parallel shafts, " + std::to_string(direct) + " direct, 3 tight boxes";
  }
  return o;
}

Outcome pair_counts() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(606);
  for (int trial = 0; trial < 10; ++trial) {
    SystemDescription d;
    d.design_space = {100.0, 100.0};
    const int roots = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < roots; ++k) d.elements.push_back(random_tree(rng, "t" + std::to_string(k), 3));
    const ValidatedSystem sys = validate(d);
    std::map<int, std::size_t> children;  // parent -> child count, -1 is the design space
    for (const ElementNode& e : sys.elements) ++children[e.parent];
    std::map<int, std::size_t> pairs;
    for (const InterferencePair& p : sys.pairs) ++pairs[sys.elements[static_cast<std::size_t>(p.i)].parent];
    for (const auto& [parent, n] : children) {
      std::size_t expected = 0;
      for (std::size_t i = 1; i < n; ++i) expected += i;
      if (pairs[parent] != expected) {
        o.fail("hierarchy " + std::to_string(trial) + ": parent " + std::to_string(parent) + " has " +
               std::to_string(pairs[parent]) + " pairs, expected " + std::to_string(expected));
      }
    }
  }
  const double s = seconds_since(t0);
  if (s >= 1.0) o.fail("took " + fmt(s) + " s");
  if (o.pass) o.detail = "10 hierarchies, " + fmt(s) + " s";
  return o;
}

Outcome export_round_trip(const std::vector<SystemDescription>& toys) {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("ptlayout-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string python = PTLAYOUT_PYTHON;
  const std::string script = PTLAYOUT_TOOLS_DIR "/mps_scipy.py";

  std::vector<SystemDescription> all{motor_gearbox(), nested_drive()};
  all.insert(all.end(), toys.begin(), toys.end());
  int counted = 0, accepted = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const std::string who = "system " + std::to_string(k) + ": ";
    const ValidatedSystem sys = validate(all[k]);
    const Formulation f = build_formulation(sys);
    const fs::path mps = dir / ("toy" + std::to_string(k) + ".mps");
    const fs::path vars = dir / ("toy" + std::to_string(k) + ".json");
    io::write_file(mps.string(), io::to_mps(f.model));

    int status = 0;
    const std::string counts = run_capture(python + " " + script + " --counts-only " + mps.string(), status);
    if (status != 0) {
      o.fail(who + "independent reader failed");
      continue;
    }
    const auto j = nlohmann::json::parse(counts);
    const int binaries = static_cast<int>(f.model.binary_vars().size());
    if (j["variables"] != f.model.num_vars() || j["rows"] != f.model.num_rows() || j["binaries"] != binaries ||
        j["objective_sense"] != "MIN") {
      o.fail(who + "reader counts differ: " + counts);
      continue;
    }
    ++counted;

    const std::string solved = run_capture(python + " " + script + " --out " + vars.string() + " " + mps.string(), status);
    if (status != 0) {
      // infeasible toys have nothing to verify; the built-in solver must agree
      if (milp::branch_and_bound(f.model).status != milp::MipStatus::infeasible) o.fail(who + "external solve failed");
      continue;
    }
    const std::vector<double> x = io::assignment_from(f.model, io::parse_variables(io::read_file(vars.string())));
    const auto bad = milp::verify_assignment(f.model, x, kLengthTol);
    if (!bad.empty()) {
      o.fail(who + "external solution violates " + bad[0].tag + " by " + fmt(bad[0].residual));
      continue;
    }
    ++accepted;
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (o.pass) {
    o.detail = std::to_string(counted) + " exports read back with equal counts, " + std::to_string(accepted) +
               " external solutions verified";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<SystemDescription> toys = toy_suite();
  int failures = 0;
  auto report = [&](int n, const char* name, const Outcome& o) {
    if (!o.pass) ++failures;
    std::cout << "criterion " << n << " (" << name << "): " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
  };
  auto guarded = [](auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      Outcome o;
      o.fail(std::string("exception: ") + e.what());
      return o;
    }
  };
  report(1, "truth tables", guarded(truth_tables));
  report(2, "orientation completeness", guarded(orientation_completeness));
  report(3, "oracle equivalence", guarded([&] { return oracle_equivalence(toys); }));
  report(4, "feasibility invariants", guarded([&] { return feasibility_invariants(toys); }));
  report(5, "case study", guarded(case_study));
  report(6, "pair counts", guarded(pair_counts));
  report(7, "export round trip", guarded([&] { return export_round_trip(toys); }));
  return failures == 0 ? 0 : 1;
}
