#include <cmath>
#include <random>

#include "doctest.h"
#include "ptlayout/formulation.hpp"
#include "ptlayout/oracle.hpp"
#include "toy_systems.hpp"

using namespace ptlayout;
using namespace toys;

namespace {

struct Solved {
  ValidatedSystem sys;
  Formulation f;
  milp::MipSolution mip;
};

Solved solve(const SystemDescription& d, FormulationOptions opt = {}) {
  Solved s{validate(d), {}, {}};
  s.f = build_formulation(s.sys, opt);
  s.mip = milp::branch_and_bound(s.f.model, {}, placement_heuristic(s.sys, s.f));
  return s;
}

int var(const Formulation& f, const std::string& name) {
  auto id = f.model.find_var(name);
  REQUIRE(id.has_value());
  return *id;
}

void fix(milp::MilpModel& m, int id, double v) {
  m.var(id).lower = v;
  m.var(id).upper = v;
}

bool has_violation(const std::vector<milp::Violation>& report, const std::string& tag, double residual) {
  for (const auto& v : report)
    if (v.tag == tag && std::abs(v.residual - residual) < 1e-9) return true;
  return false;
}

}  // namespace

TEST_CASE("big-M is the design-space perimeter half") {
  CHECK(compute_big_m({4.0, 5.0}).value == 9.0);
}

TEST_CASE("containment row reports the overhang") {
  SystemDescription d;
  d.design_space = {4.0, 5.0};
  d.elements.push_back(fixed_at(component("box", 1.0, 1.0), 2.0, 0.0));
  const ValidatedSystem sys = validate(d);
  const Formulation f = build_formulation(sys);
  std::vector<double> x(static_cast<std::size_t>(f.model.num_vars()), 0.0);
  x[var(f, "x:box")] = 2.0;
  x[var(f, "w:box")] = 1.0;
  x[var(f, "l:box")] = 1.0;
  const auto report = milp::verify_assignment(f.model, x);
  CHECK(has_violation(report, "eq1/0/box/b", 0.5));
  CHECK(milp::branch_and_bound(f.model).status == milp::MipStatus::infeasible);
}

TEST_CASE("child as large as its parent is pinned to the parent center") {
  SystemDescription d;
  d.design_space = {2.0, 1.0};
  d.elements.push_back(fixed_orientation(component("slab", 2.0, 1.0)));
  const ValidatedSystem sys = validate(d);
  Formulation f = build_formulation(sys);
  for (double sign : {1.0, -1.0}) {
    milp::MilpModel m = f.model;
    m.set_objective(var(f, "x:slab"), sign);
    m.set_objective(var(f, "y:slab"), sign);
    const auto sol = milp::solve_lp(m);
    REQUIRE(sol.status == milp::LpStatus::optimal);
    CHECK(sol.x[var(f, "x:slab")] == doctest::Approx(0.0));
    CHECK(sol.x[var(f, "y:slab")] == doctest::Approx(0.0));
  }
}

TEST_CASE("rotation swaps the footprint") {
  SystemDescription d;
  d.design_space = {10.0, 10.0};
  d.elements.push_back(component("c", 2.0, 1.0));
  const ValidatedSystem sys = validate(d);
  const Formulation f = build_formulation(sys);
  for (int r : {0, 1}) {
    milp::MilpModel m = f.model;
    fix(m, var(f, "r:c"), r);
    const auto sol = milp::solve_lp(m);
    REQUIRE(sol.status == milp::LpStatus::optimal);
    CHECK(sol.x[var(f, "w:c")] == doctest::Approx(r ? 1.0 : 2.0));
    CHECK(sol.x[var(f, "l:c")] == doctest::Approx(r ? 2.0 : 1.0));
  }
  CHECK(f.model.count_rows_with_prefix("eq3/") == 2);
}

TEST_CASE("port transform rows reproduce the geometric transform in all eight states") {
  SystemDescription d;
  d.design_space = {10.0, 10.0};
  d.elements.push_back(component("c", 2.0, 1.0, {elec("p", 1.0, 0.5)}));
  const ValidatedSystem sys = validate(d);
  const Formulation f = build_formulation(sys);
  for (const auto& s : oracle::all_states()) {
    milp::MilpModel m = f.model;
    fix(m, var(f, "m:c"), s.m);
    fix(m, var(f, "n:c"), s.n);
    fix(m, var(f, "r:c"), s.r);
    const auto sol = milp::solve_lp(m);
    REQUIRE(sol.status == milp::LpStatus::optimal);
    const Offset want = oracle::transform_offset({1.0, 0.5}, s);
    CHECK(sol.x[var(f, "a:c.p")] == doctest::Approx(want.a));
    CHECK(sol.x[var(f, "b:c.p")] == doctest::Approx(want.b));
  }
  // the three listed cases
  CHECK(oracle::transform_offset({1.0, 0.5}, {false, false, false}) == Offset{1.0, 0.5});
  CHECK(oracle::transform_offset({1.0, 0.5}, {true, false, false}) == Offset{-1.0, 0.5});
  CHECK(oracle::transform_offset({1.0, 0.5}, {false, false, true}) == Offset{0.5, -1.0});
}

TEST_CASE("interference: full overlap is infeasible, touching boxes are not") {
  SystemDescription d;
  d.design_space = {10.0, 10.0};
  d.elements.push_back(fixed_at(component("u", 1.0, 1.0), 0.0, 0.0));
  d.elements.push_back(fixed_at(component("v", 1.0, 1.0), 0.0, 0.0));
  CHECK(solve(d).mip.status == milp::MipStatus::infeasible);

  d.elements[1] = fixed_at(component("v", 1.0, 1.0), 0.0, 1.0);
  const Solved s = solve(d);
  REQUIRE(s.mip.status == milp::MipStatus::optimal);
  CHECK(s.mip.x[var(s.f, "p:root:0")] == 0.0);
  CHECK(s.mip.x[var(s.f, "q:root:0")] == 0.0);
}

TEST_CASE("halving big-M breaks a feasible corner-to-corner instance") {
  SystemDescription d;
  d.design_space = {10.0, 10.0};
  d.elements.push_back(fixed_at(component("u", 1.0, 1.0), -4.5, -4.5));
  d.elements.push_back(fixed_at(component("v", 1.0, 1.0), 4.5, 4.5));
  CHECK(solve(d).mip.status == milp::MipStatus::optimal);
  FormulationOptions small;
  small.big_m = 5.0;
  CHECK(solve(d, small).mip.status == milp::MipStatus::infeasible);
}

TEST_CASE("subsystem port edge follows the pair placement") {
  // Subsystem first in declaration order: it is element i (ego).
  SystemDescription d;
  d.design_space = {20.0, 20.0};
  d.elements.push_back(subsystem("s", {component("a", 1.0, 1.0), component("b", 1.0, 1.0)},
                                 {sub_port("m", EnergyDomain::mechanical)}));
  d.elements.push_back(component("c", 1.0, 1.0, {mech("m", 0.5, 0.0)}));
  d.connections.push_back(link("s", "m", "c", "m"));

  struct Case {
    int p, q;
    bool ego;
    const char* edge;
  };
  for (const Case& c : {Case{0, 0, true, "top"}, Case{1, 0, true, "right"}, Case{0, 0, false, "bottom"},
                        Case{1, 1, false, "right"}}) {
    SystemDescription dd = d;
    if (!c.ego) std::swap(dd.elements[0], dd.elements[1]);
    const ValidatedSystem sys = validate(dd);
    Formulation f = build_formulation(sys);
    fix(f.model, var(f, "p:root:0"), c.p);
    fix(f.model, var(f, "q:root:0"), c.q);
    const auto mip = milp::branch_and_bound(f.model);
    REQUIRE(mip.status == milp::MipStatus::optimal);
    const double a = mip.x[var(f, "a:s.m")];
    const double b = mip.x[var(f, "b:s.m")];
    const double w = mip.x[var(f, "w:s")];
    const double l = mip.x[var(f, "l:s")];
    const std::string edge = c.edge;
    if (edge == "top") CHECK(b == doctest::Approx(l / 2));
    if (edge == "bottom") CHECK(b == doctest::Approx(-l / 2));
    if (edge == "right") CHECK(a == doctest::Approx(w / 2));
    CHECK(f.model.count_rows_with_prefix(c.ego ? "eq7/" : "eq9/") == 4);
  }
}

TEST_CASE("l1 and squared objectives on a known offset") {
  SystemDescription d;
  d.design_space = {20.0, 20.0};
  d.elements.push_back(fixed_at(component("u", 2.0, 2.0, {elec("e", 0.0, 0.0)}), 0.0, 0.0));
  d.elements.push_back(fixed_at(component("v", 2.0, 2.0, {elec("e", 0.0, 0.0)}), 3.0, 4.0));
  d.connections.push_back(link("u", "e", "v", "e"));
  const Solved s = solve(d);
  REQUIRE(s.mip.status == milp::MipStatus::optimal);
  CHECK(s.mip.objective == doctest::Approx(7.0));
  const PlacementSolution placed = decode_solution(s.sys, s.f, s.mip.x);
  CHECK(placed.connections[0].length_l1 == doctest::Approx(7.0));
  CHECK(placed.connections[0].dx * placed.connections[0].dx + placed.connections[0].dy * placed.connections[0].dy ==
        doctest::Approx(25.0));

  FormulationOptions sq;
  sq.objective = ObjectiveMode::squared_euclidean;
  const Formulation fq = build_formulation(s.sys, sq);
  REQUIRE(fq.model.has_quadratic());
  CHECK(fq.model.quadratic().size() == 2);
  CHECK(fq.model.count_rows_with_prefix("obj/") == 2);
}

TEST_CASE("coincident direct ports cost nothing") {
  SystemDescription d;
  d.design_space = {20.0, 20.0};
  d.elements.push_back(component("em", 2.0, 1.0, {mech("shaft", 1.0, 0.0, ConnectionKind::direct)}));
  d.elements.push_back(fixed_at(component("gb", 1.0, 1.0, {mech("in", -0.5, 0.0, ConnectionKind::direct)}), 0.0, 0.0));
  d.connections.push_back(link("em", "shaft", "gb", "in"));
  const Solved s = solve(d);
  REQUIRE(s.mip.status == milp::MipStatus::optimal);
  CHECK(s.mip.objective == doctest::Approx(0.0).epsilon(1e-9));
  const PlacementSolution placed = decode_solution(s.sys, s.f, s.mip.x);
  CHECK(placed.ports[0].x == doctest::Approx(placed.ports[1].x));
  CHECK(placed.ports[0].y == doctest::Approx(placed.ports[1].y));
  CHECK(oracle::audit_layout(s.sys, placed).empty());
}

TEST_CASE("row counts follow the closed forms") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemDescription d = random_toy(rng);
    const ValidatedSystem sys = validate(d);
    const Formulation f = build_formulation(sys);
    int sub_ports = 0, rotated = 0, comp_ports = 0, edge_ports_ego = 0, edge_ports_conn = 0, coincidence = 0;
    for (const ElementNode& e : sys.elements) {
      if (!e.is_component()) {
        sub_ports += static_cast<int>(e.ports.size());
        for (int p : e.ports) {
          if (!sys.alignment[p]) continue;
          (sys.alignment[p]->perspective == Perspective::ego ? edge_ports_ego : edge_ports_conn) += 1;
        }
        continue;
      }
      if (!(e.fixed_pose && e.fixed_pose->r)) ++rotated;
      comp_ports += static_cast<int>(e.ports.size());
    }
    for (const ConnectionNode& c : sys.connections) {
      if (c.domain != EnergyDomain::mechanical) continue;
      if (c.direct || c.same_level || sys.alignment[c.upper_port]) ++coincidence;
    }
    CHECK(f.model.count_rows_with_prefix("eq1/") == 4 * static_cast<int>(sys.elements.size()));
    CHECK(f.model.count_rows_with_prefix("eq2/") == 4 * sub_ports);
    CHECK(f.model.count_rows_with_prefix("eq3/") == 2 * rotated);
    CHECK(f.model.count_rows_with_prefix("eq4/") == 8 * comp_ports);
    CHECK(f.model.count_rows_with_prefix("eq5/") == 4 * static_cast<int>(sys.pairs.size()));
    CHECK(f.model.count_rows_with_prefix("eq7/") == 4 * edge_ports_ego);
    CHECK(f.model.count_rows_with_prefix("eq9/") == 4 * edge_ports_conn);
    CHECK(f.model.count_rows_with_prefix("eq8/") == 4 * coincidence);
    CHECK(f.model.count_rows_with_prefix("obj/") == 4 * static_cast<int>(sys.connections.size()));
    // families appear in sorted blocks
    for (int i = 1; i < f.model.num_rows(); ++i) CHECK(row_family(f.model.row(i - 1).tag) <= row_family(f.model.row(i).tag));
  }
}

TEST_CASE("solutions satisfy the geometric audit") {
  for (const SystemDescription& d : {motor_gearbox(), nested_drive()}) {
    const Solved s = solve(d);
    REQUIRE(s.mip.status == milp::MipStatus::optimal);
    CHECK(milp::verify_assignment(s.f.model, s.mip.x).empty());
    const PlacementSolution placed = decode_solution(s.sys, s.f, s.mip.x);
    const auto issues = oracle::audit_layout(s.sys, placed);
    for (const auto& i : issues) MESSAGE(i.kind << " " << i.subject << " " << i.residual);
    CHECK(issues.empty());
  }
}

TEST_CASE("flipping a pair binary of a touching solution breaks a tagged row") {
  SystemDescription d;
  d.design_space = {10.0, 10.0};
  d.elements.push_back(fixed_at(component("u", 1.0, 1.0), 0.0, 0.0));
  d.elements.push_back(fixed_at(component("v", 1.0, 1.0), 0.0, 1.0));
  const Solved s = solve(d);
  REQUIRE(s.mip.status == milp::MipStatus::optimal);
  std::vector<double> x = s.mip.x;
  x[var(s.f, "p:root:0")] = 1.0;
  const auto report = milp::verify_assignment(s.f.model, x);
  REQUIRE_FALSE(report.empty());
  CHECK(report[0].tag.rfind("eq5/", 0) == 0);
}

TEST_CASE("uniform scaling scales the optimum and keeps the optimal binaries") {
  auto scaled = [](SystemDescription d, double s) {
    d.design_space.width *= s;
    d.design_space.length *= s;
    std::function<void(ElementSpec&)> walk = [&](ElementSpec& e) {
      e.default_width *= s;
      e.default_length *= s;
      for (PortSpec& p : e.ports)
        if (p.default_offset) *p.default_offset = {p.default_offset->a * s, p.default_offset->b * s};
      if (e.fixed_pose) {
        if (e.fixed_pose->x) *e.fixed_pose->x *= s;
        if (e.fixed_pose->y) *e.fixed_pose->y *= s;
      }
      for (ElementSpec& c : e.children) walk(c);
    };
    for (ElementSpec& e : d.elements) walk(e);
    return d;
  };
  for (const SystemDescription& base : {motor_gearbox(), nested_drive()}) {
    const ValidatedSystem s1 = validate(base);
    const ValidatedSystem s10 = validate(scaled(base, 10.0));
    const auto e1 = oracle::enumerate_optimal(build_formulation(s1).model);
    const auto e10 = oracle::enumerate_optimal(build_formulation(s10).model);
    REQUIRE(e1.best.has_incumbent());
    CHECK(e10.best.objective == doctest::Approx(10.0 * e1.best.objective).epsilon(1e-9));
    CHECK(oracle::optimal_assignments(e1) == oracle::optimal_assignments(e10));
  }
}
