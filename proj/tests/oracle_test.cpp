#include <set>

#include "doctest.h"
#include "ptlayout/formulation.hpp"
#include "ptlayout/oracle.hpp"
#include "toy_systems.hpp"

using namespace ptlayout;
using namespace ptlayout::oracle;

namespace {
constexpr std::array<Edge, 4> kEdges{Edge::top, Edge::bottom, Edge::right, Edge::left};
}

TEST_CASE("identity and the worked rotation example") {
  const SimulatedPort same = simulate_orientation(Edge::right, {1.0, 0.0}, {false, false, false});
  CHECK(same.edge == Edge::right);
  CHECK(same.offset == Offset{1.0, 0.0});
  for (bool n : {false, true}) CHECK(simulate_orientation(Edge::right, {1.0, 0.0}, {true, n, true}).edge == Edge::top);
}

TEST_CASE("offset pointing into the body is rejected") {
  CHECK_THROWS_AS((void)simulate_orientation(Edge::top, {0.0, -0.5}, {}), std::invalid_argument);
}

TEST_CASE("eight states give eight placements of a generic port") {
  std::set<std::pair<double, double>> seen;
  for (const auto& s : all_states()) {
    const SimulatedPort p = simulate_orientation(Edge::right, {1.0, 0.3}, s);
    seen.insert({p.offset.a, p.offset.b});
  }
  CHECK(seen.size() == 8);
}

TEST_CASE("mirrors are involutions") {
  for (const auto& s : all_states()) {
    const Offset o{0.7, -0.2};
    const Offset once = transform_offset(o, {s.m, false, false});
    CHECK(transform_offset(once, {s.m, false, false}) == o);
    const Offset twice = transform_offset(transform_offset(o, {false, s.n, false}), {false, s.n, false});
    CHECK(twice == o);
  }
}

TEST_CASE("derive_orientation matches the simulated table in all 32 cases") {
  for (Perspective persp : {Perspective::ego, Perspective::connecting}) {
    const TruthTables t = regenerate_truth_tables(persp);
    for (std::size_t e = 0; e < 4; ++e) {
      for (int k = 0; k < 4; ++k) {
        const bool p = k >= 2, q = k % 2 == 1;
        CHECK(derive_orientation(kEdges[e], p, q, persp) == t.table[e][k]);
        // every satisfying state really points the port the right way
        for (const auto& s : t.states[e][k]) {
          const OrientationRequirement req = derive_orientation(kEdges[e], p, q, persp);
          if (req.m) CHECK(*req.m == s.m);
          if (req.n) CHECK(*req.n == s.n);
          if (req.r) CHECK(*req.r == s.r);
        }
        CHECK(t.states[e][k].size() == 2);
      }
      CHECK(orientation_logic(kEdges[e], persp) == t.logic[e]);
    }
  }
}

TEST_CASE("regenerated logic and the printed table") {
  const TruthTables t = regenerate_truth_tables();
  CHECK(t.logic[0] == OrientationLogic{Logic::free, Logic::q, Logic::p});
  CHECK(t.logic[1] == OrientationLogic{Logic::free, Logic::not_q, Logic::p});
  CHECK(t.logic[2] == OrientationLogic{Logic::p_xnor_q, Logic::free, Logic::not_p});
  CHECK(t.logic[3] == OrientationLogic{Logic::p_xor_q, Logic::free, Logic::not_p});
  const auto diffs = compare_with_printed(t);
  REQUIRE(diffs.size() == 1);
  CHECK(diffs[0].edge == Edge::left);
  CHECK(diffs[0].p);
  CHECK(diffs[0].q);
  CHECK(diffs[0].printed.m == true);
  CHECK(diffs[0].derived.m == false);

  const auto rows = compare_with_printed_rows(t);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].edge == Edge::right);
  CHECK(rows[0].printed.m == Logic::p_xor_q);
  CHECK(rows[0].derived.m == Logic::p_xnor_q);
}

TEST_CASE("enumeration without binaries is a plain LP") {
  milp::MilpModel m;
  const int x = m.add_variable("x", 0.0, 10.0);
  m.set_objective(x, 1.0);
  m.add_row("lo", {{x, 1.0}}, milp::Sense::greater_equal, 1.0);
  const Enumeration e = enumerate_optimal(m);
  CHECK(e.best.objective == doctest::Approx(milp::solve_lp(m).objective));
  CHECK(e.feasible.size() == 1);
}

TEST_CASE("overlap toy has no feasible assignment") {
  using namespace toys;
  SystemDescription d;
  d.design_space = {10.0, 10.0};
  d.elements.push_back(fixed_at(component("u", 2.0, 2.0), 0.0, 0.0));
  d.elements.push_back(fixed_at(component("v", 2.0, 2.0), 0.5, 0.5));
  const ValidatedSystem sys = validate(d);
  const Enumeration e = enumerate_optimal(build_formulation(sys).model);
  CHECK(e.best.status == milp::MipStatus::infeasible);
  CHECK(e.feasible.empty());
  CHECK(e.best.nodes == 4);
}

TEST_CASE("two-component alignment toy has the geometrically expected optimum") {
  using namespace toys;
  // Fixed motor with its shaft on the right edge; the gearbox must sit to
  // its right: (p, q) = (1, 0).
  SystemDescription d;
  d.design_space = {10.0, 10.0};
  d.elements.push_back(fixed_at(component("em", 2.0, 1.0, {mech("s", 1.0, 0.0)}), -2.0, 0.0));
  d.elements.push_back(fixed_orientation(component("gb", 1.0, 1.0, {mech("in", -0.5, 0.0)})));
  d.connections.push_back(link("em", "s", "gb", "in"));
  const ValidatedSystem sys = validate(d);
  const Formulation f = build_formulation(sys);
  const Enumeration e = enumerate_optimal(f.model);
  const auto best = optimal_assignments(e);
  REQUIRE(best.size() == 1);
  CHECK(best[0] == std::vector<double>{1.0, 0.0});
  CHECK(e.best.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cap on free binaries") {
  milp::MilpModel m;
  for (int k = 0; k < 25; ++k) (void)m.add_binary("b" + std::to_string(k));
  CHECK_THROWS_AS((void)enumerate_optimal(m), std::invalid_argument);
}
