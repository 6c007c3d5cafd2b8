#include <random>

#include "doctest.h"
#include "toy_systems.hpp"

using namespace ptlayout;
using namespace toys;

namespace {

std::vector<std::string> codes_of(const SystemDescription& d) {
  try {
    (void)validate(d);
  } catch (const ValidationError& e) {
    std::vector<std::string> out;
    for (const Issue& i : e.issues()) out.push_back(i.code);
    return out;
  }
  return {};
}

bool fails_with(const SystemDescription& d, const std::string& code) {
  const auto codes = codes_of(d);
  return std::find(codes.begin(), codes.end(), code) != codes.end();
}

SystemDescription battery_chain(int modules) {
  std::vector<ElementSpec> cells;
  for (int k = 1; k <= modules; ++k) {
    cells.push_back(component("m" + std::to_string(k), 0.3, 0.4, {elec("minus", -0.15, 0.0), elec("plus", 0.15, 0.0)}));
  }
  SystemDescription d;
  d.design_space = {20.0, 20.0};
  d.elements.push_back(subsystem("battery", cells, {sub_port("hv", EnergyDomain::electrical)}));
  d.elements.push_back(component("inv", 1.0, 1.0, {elec("dc", 0.0, 0.5)}));
  d.connections.push_back(link("battery", "hv", "battery.m1", "minus"));
  for (int k = 1; k < modules; ++k) {
    d.connections.push_back(
        link("battery.m" + std::to_string(k), "plus", "battery.m" + std::to_string(k + 1), "minus"));
  }
  d.connections.push_back(link("battery.m" + std::to_string(modules), "plus", "battery", "hv"));
  d.connections.push_back(link("inv", "dc", "battery", "hv"));
  return d;
}

}  // namespace

TEST_CASE("valid nested system gets levels and pairs") {
  const ValidatedSystem sys = validate(nested_drive());
  CHECK(sys.n_levels == 1);
  CHECK(sys.top_level.size() == 2);
  CHECK(sys.pairs.size() == 2);  // motor~trans, g1~g2
  CHECK(sys.elements_at_level(1).size() == 2);
  REQUIRE(sys.connections.size() == 3);
  CHECK(sys.connections[0].same_level);
  CHECK_FALSE(sys.connections[1].same_level);
  // the internal gear inherits the placement context of the transmission port
  const int trans_in = *sys.find_port("trans", "in");
  const int g1_in = *sys.find_port("trans.g1", "in");
  REQUIRE(sys.alignment[trans_in]);
  REQUIRE(sys.alignment[g1_in]);
  CHECK(sys.alignment[g1_in]->pair == sys.alignment[trans_in]->pair);
  CHECK(sys.alignment[g1_in]->perspective == sys.alignment[trans_in]->perspective);
}

TEST_CASE("structural errors") {
  SystemDescription d = motor_gearbox();
  d.elements[0].children.push_back(component("x", 1.0, 1.0));
  CHECK(fails_with(d, "component with children"));

  d = motor_gearbox();
  d.connections.push_back(link("motor", "shaft", "battery", "plus"));
  CHECK(fails_with(d, "domain mismatch"));

  d = motor_gearbox();
  d.connections.push_back(link("motor", "nope", "battery", "plus"));
  CHECK(fails_with(d, "dangling port reference"));

  d = motor_gearbox();
  d.elements.push_back(subsystem("lonely", {component("only", 1.0, 1.0)}));
  CHECK(fails_with(d, "subsystem with fewer than two children"));

  d = motor_gearbox();
  d.elements.clear();
  d.connections.clear();
  CHECK(fails_with(d, "no elements"));

  d = motor_gearbox();
  d.elements[1].ports[0].default_offset = Offset{0.2, 0.1};
  CHECK(fails_with(d, "port not on boundary"));

  d = motor_gearbox();
  d.elements[1].ports[0].default_offset = Offset{0.75, 0.5};
  CHECK(fails_with(d, "ambiguous port edge"));

  d = motor_gearbox();
  d.connections.push_back(d.connections[0]);
  CHECK(fails_with(d, "duplicate connection"));

  d = motor_gearbox();
  d.elements.push_back(component("motor", 1.0, 1.0));
  CHECK(fails_with(d, "duplicate id"));

  d = nested_drive();
  d.connections.push_back(link("motor", "shaft", "trans.g2", "in"));
  CHECK(fails_with(d, "inter-level connection not parent-to-own-child"));
}

TEST_CASE("a mechanical port in two alignments is rejected") {
  SystemDescription d = motor_gearbox();
  d.elements.push_back(component("pump", 1.0, 1.0, {mech("in", 0.5, 0.0)}));
  d.connections.push_back(link("motor", "shaft", "pump", "in"));
  CHECK(fails_with(d, "conflicting alignment"));
}

TEST_CASE("pair counts") {
  auto flat = [](int n) {
    SystemDescription d;
    d.design_space = {100.0, 100.0};
    for (int k = 0; k < n; ++k) d.elements.push_back(component("c" + std::to_string(k), 1.0, 1.0));
    return validate(d);
  };
  CHECK(interference_pairs(flat(4), -1).size() == 6);
  CHECK(interference_pairs(flat(1), -1).empty());
  CHECK(interference_pairs(flat(8), -1).size() == 28);

  const auto pairs = interference_pairs(flat(4), -1);
  for (std::size_t z = 0; z < pairs.size(); ++z) {
    CHECK(pairs[z].i < pairs[z].j);
    CHECK(pairs[z].index == static_cast<int>(z));
  }
}

TEST_CASE("random hierarchies: pair totals and level partition") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    SystemDescription d;
    d.design_space = {100.0, 100.0};
    const int roots = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < roots; ++k) d.elements.push_back(random_tree(rng, "t" + std::to_string(k), 3));
    const ValidatedSystem sys = validate(d);
    std::size_t expected = 0;
    auto choose2 = [](std::size_t n) { return n * (n - 1) / 2; };
    expected += choose2(sys.top_level.size());
    for (int s : sys.subsystems()) expected += choose2(sys.elements[s].children.size());
    CHECK(sys.pairs.size() == expected);
    std::size_t by_level = 0;
    for (int l = 0; l <= sys.n_levels; ++l) by_level += sys.elements_at_level(l).size();
    CHECK(by_level == sys.elements.size());
    for (const InterferencePair& p : sys.pairs) CHECK(sys.elements[p.i].parent == sys.elements[p.j].parent);
  }
}

TEST_CASE("grouping a series chain into blocks") {
  const SystemDescription d = battery_chain(24);
  const SystemDescription g = group_elements(d, {{"battery", 4}});
  REQUIRE(g.elements[0].children.size() == 4);
  CHECK(g.elements[0].children[0].id == "block1");
  CHECK(g.elements[0].children[0].default_width == doctest::Approx(6 * 0.3));
  CHECK(g.elements[0].children[0].default_length == doctest::Approx(0.4));
  double total_width = 0;
  for (const ElementSpec& b : g.elements[0].children) total_width += b.default_width;
  CHECK(total_width == doctest::Approx(24 * 0.3));

  const ValidatedSystem sys = validate(g);
  // chain endpoints still reach the pack port; 3 links remain between blocks
  int links = 0;
  bool head = false, tail = false;
  for (const Connection& c : g.connections) {
    if (c.from.element.rfind("battery.block", 0) == 0 && c.to.element.rfind("battery.block", 0) == 0) ++links;
    if (c.from.str() == "battery.hv" && c.to.str() == "battery.block1.minus") head = true;
    if (c.from.str() == "battery.block4.plus" && c.to.str() == "battery.hv") tail = true;
  }
  CHECK(links == 3);
  CHECK(head);
  CHECK(tail);
  CHECK(sys.elements.size() == 2 + 4);
}

TEST_CASE("grouping edge cases") {
  const SystemDescription d = battery_chain(24);
  CHECK(group_elements(d, {{"battery", 24}}) == d);
  try {
    (void)group_elements(d, {{"battery", 5}});
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(e.has("g does not divide k"));
  }
  SystemDescription odd = d;
  odd.elements[0].children[3].default_width = 0.5;
  try {
    (void)group_elements(odd, {{"battery", 4}});
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(e.has("non-identical children"));
  }
}
