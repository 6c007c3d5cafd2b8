#include "ptlayout/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace ptlayout::oracle {

namespace {

using Vec = std::array<double, 2>;
using Mat = std::array<std::array<double, 2>, 2>;

Vec apply(const Mat& m, Vec v) { return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]}; }

// Mirror in the body frame, then the quarter turn.
Vec orient(Vec v, OrientationState s) {
  const Mat mirror_m{{{-1, 0}, {0, 1}}};
  const Mat mirror_n{{{1, 0}, {0, -1}}};
  const Mat clockwise{{{0, 1}, {-1, 0}}};
  if (s.m) v = apply(mirror_m, v);
  if (s.n) v = apply(mirror_n, v);
  if (s.r) v = apply(clockwise, v);
  return v;
}

Vec normal(Edge e) {
  switch (e) {
    case Edge::top: return {0, 1};
    case Edge::bottom: return {0, -1};
    case Edge::right: return {1, 0};
    case Edge::left: return {-1, 0};
  }
  return {0, 0};
}

Edge edge_of(Vec n) {
  if (n[1] > 0.5) return Edge::top;
  if (n[1] < -0.5) return Edge::bottom;
  return n[0] > 0 ? Edge::right : Edge::left;
}

constexpr std::array<Edge, 4> kEdges{Edge::top, Edge::bottom, Edge::right, Edge::left};

std::optional<Logic> name_column(const std::array<std::optional<bool>, 4>& values) {
  if (std::all_of(values.begin(), values.end(), [](const auto& v) { return !v; })) return Logic::free;
  for (Logic candidate : {Logic::p, Logic::not_p, Logic::q, Logic::not_q, Logic::p_xor_q, Logic::p_xnor_q}) {
    bool match = true;
    for (int k = 0; k < 4; ++k) {
      const bool p = k >= 2;
      const bool q = k % 2 == 1;
      if (values[k] != evaluate(candidate, p, q)) match = false;
    }
    if (match) return candidate;
  }
  return std::nullopt;
}

}  // namespace

std::array<OrientationState, 8> all_states() {
  std::array<OrientationState, 8> out;
  for (int k = 0; k < 8; ++k) out[k] = {(k & 4) != 0, (k & 2) != 0, (k & 1) != 0};
  return out;
}

Offset transform_offset(Offset offset, OrientationState state) {
  const Vec v = orient({offset.a, offset.b}, state);
  return {v[0], v[1]};
}

SimulatedPort simulate_orientation(Edge default_edge, Offset default_offset, OrientationState state) {
  const Vec n = normal(default_edge);
  if (n[0] * default_offset.a + n[1] * default_offset.b <= 0.0) {
    throw std::invalid_argument("port not on boundary: offset does not lie on the " + to_string(default_edge) + " edge");
  }
  return {edge_of(orient(n, state)), transform_offset(default_offset, state)};
}

Edge required_edge(bool p, bool q, Perspective perspective) {
  // Relative to the first element of the pair: (0,0) the other one is above,
  // (0,1) below, (1,0) to the right, (1,1) to the left.
  Edge toward = p ? (q ? Edge::left : Edge::right) : (q ? Edge::bottom : Edge::top);
  if (perspective == Perspective::connecting) toward = opposite(toward);
  return toward;
}

TruthTables regenerate_truth_tables(Perspective perspective) {
  TruthTables out;
  for (std::size_t e = 0; e < kEdges.size(); ++e) {
    // Any offset that points out of the edge will do; the edge mapping does
    // not depend on where along the edge the port sits.
    const Vec n = normal(kEdges[e]);
    const Offset probe{n[0] * 2.0 + n[1] * 0.3, n[1] * 1.0 + n[0] * 0.2};
    for (int k = 0; k < 4; ++k) {
      const bool p = k >= 2;
      const bool q = k % 2 == 1;
      const Edge want = required_edge(p, q, perspective);
      std::vector<OrientationState> hits;
      for (const OrientationState& s : all_states()) {
        if (simulate_orientation(kEdges[e], probe, s).edge == want) hits.push_back(s);
      }
      auto agreed = [&](bool OrientationState::*field) -> std::optional<bool> {
        if (hits.empty()) return std::nullopt;
        const bool first = hits.front().*field;
        for (const auto& s : hits)
          if (s.*field != first) return std::nullopt;
        return first;
      };
      out.table[e][static_cast<std::size_t>(k)] = {agreed(&OrientationState::m), agreed(&OrientationState::n),
                                                  agreed(&OrientationState::r)};
      out.states[e][static_cast<std::size_t>(k)] = hits;
    }
    std::array<std::optional<bool>, 4> mv, nv, rv;
    for (int k = 0; k < 4; ++k) {
      mv[k] = out.table[e][k].m;
      nv[k] = out.table[e][k].n;
      rv[k] = out.table[e][k].r;
    }
    const auto m = name_column(mv);
    const auto nn = name_column(nv);
    const auto r = name_column(rv);
    if (!m || !nn || !r) throw std::logic_error("truth table column is not a function of (p, q)");
    out.logic[e] = {*m, *nn, *r};
  }
  return out;
}

std::array<std::array<OrientationRequirement, 4>, 4> printed_truth_table() {
  const std::optional<bool> f;  // free
  const std::optional<bool> o = false;
  const std::optional<bool> i = true;
  std::array<std::array<OrientationRequirement, 4>, 4> t;
  // [edge][2p + q] as (m, n, r)
  t[0] = {{{f, o, o}, {f, i, o}, {f, o, i}, {f, i, i}}};  // top
  t[1] = {{{f, i, o}, {f, o, o}, {f, i, i}, {f, o, i}}};  // bottom
  t[2] = {{{i, f, i}, {o, f, i}, {o, f, o}, {i, f, o}}};  // right
  t[3] = {{{o, f, i}, {i, f, i}, {i, f, o}, {i, f, o}}};  // left
  return t;
}

std::vector<TableDifference> compare_with_printed(const TruthTables& tables) {
  const auto printed = printed_truth_table();
  std::vector<TableDifference> out;
  for (std::size_t e = 0; e < 4; ++e) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (printed[e][k] == tables.table[e][k]) continue;
      out.push_back({kEdges[e], k >= 2, k % 2 == 1, printed[e][k], tables.table[e][k]});
    }
  }
  return out;
}

std::array<OrientationLogic, 4> printed_row_logic() {
  return {{{Logic::free, Logic::q, Logic::p},
           {Logic::free, Logic::not_q, Logic::p},
           {Logic::p_xor_q, Logic::free, Logic::not_p},
           {Logic::p_xor_q, Logic::free, Logic::not_p}}};
}

std::vector<LogicDifference> compare_with_printed_rows(const TruthTables& tables) {
  const auto printed = printed_row_logic();
  std::vector<LogicDifference> out;
  for (std::size_t e = 0; e < 4; ++e) {
    if (printed[e] != tables.logic[e]) out.push_back({kEdges[e], printed[e], tables.logic[e]});
  }
  return out;
}

// ---------------------------------------------------------------------------

Enumeration enumerate_optimal(const milp::MilpModel& model) {
  Enumeration out;
  for (int v : model.binary_vars()) {
    if (model.var(v).lower != model.var(v).upper) out.binaries.push_back(v);
  }
  const int k = static_cast<int>(out.binaries.size());
  if (k > kEnumerationCap) {
    throw std::invalid_argument("cap exceeded: " + std::to_string(k) + " free binaries, at most " +
                                std::to_string(kEnumerationCap) + " enumerated");
  }
  milp::LpEngine engine(model);
  for (int v : out.binaries) engine.set_bounds(v, 0.0, 0.0);
  std::vector<double> bits(static_cast<std::size_t>(k), 0.0);
  const std::uint64_t total = std::uint64_t{1} << k;
  // Gray-code order: consecutive assignments differ in one binary.
  for (std::uint64_t step = 0; step < total; ++step) {
    if (step > 0) {
      const int flip = std::countr_zero(step);
      bits[static_cast<std::size_t>(flip)] = 1.0 - bits[static_cast<std::size_t>(flip)];
      const double b = bits[static_cast<std::size_t>(flip)];
      engine.set_bounds(out.binaries[static_cast<std::size_t>(flip)], b, b);
    }
    const milp::LpSolution sol = engine.solve();
    ++out.best.nodes;
    out.best.lp_iterations += sol.iterations;
    if (sol.status != milp::LpStatus::optimal) continue;
    out.feasible.push_back(bits);
    out.objectives.push_back(sol.objective);
    if (sol.objective < out.best.objective) {
      out.best.objective = sol.objective;
      out.best.x = sol.x;
      for (std::size_t j = 0; j < out.binaries.size(); ++j) out.best.x[static_cast<std::size_t>(out.binaries[j])] = bits[j];
    }
  }
  if (out.best.has_incumbent()) {
    out.best.status = milp::MipStatus::optimal;
    out.best.bound = out.best.objective;
  } else {
    out.best.status = milp::MipStatus::infeasible;
  }
  return out;
}

std::vector<std::vector<double>> optimal_assignments(const Enumeration& e, double tol) {
  std::vector<std::vector<double>> out;
  if (!e.best.has_incumbent()) return out;
  const double cutoff = e.best.objective + tol * std::max(1.0, std::abs(e.best.objective));
  for (std::size_t k = 0; k < e.feasible.size(); ++k) {
    if (e.objectives[k] <= cutoff) out.push_back(e.feasible[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Rect {
  double x0, x1, y0, y1;
};

Rect rect_of(const ElementPlacement& e) { return {e.x - e.w / 2, e.x + e.w / 2, e.y - e.l / 2, e.y + e.l / 2}; }

// Edges of a w x l box that the offset touches (one, or two at a corner).
std::vector<Edge> edges_at(double w, double l, Offset o, double tol) {
  std::vector<Edge> out;
  const bool inside_x = std::abs(o.a) <= w / 2 + tol;
  const bool inside_y = std::abs(o.b) <= l / 2 + tol;
  if (!inside_x || !inside_y) return out;
  if (std::abs(o.b - l / 2) <= tol) out.push_back(Edge::top);
  if (std::abs(o.b + l / 2) <= tol) out.push_back(Edge::bottom);
  if (std::abs(o.a - w / 2) <= tol) out.push_back(Edge::right);
  if (std::abs(o.a + w / 2) <= tol) out.push_back(Edge::left);
  return out;
}

bool contains(const std::vector<Edge>& edges, Edge e) { return std::find(edges.begin(), edges.end(), e) != edges.end(); }

}  // namespace

std::vector<AuditIssue> audit_layout(const ValidatedSystem& system, const PlacementSolution& sol, double tol) {
  std::vector<AuditIssue> out;
  const auto& els = sol.elements;

  for (const InterferencePair& pr : system.pairs) {
    const Rect a = rect_of(els[static_cast<std::size_t>(pr.i)]);
    const Rect b = rect_of(els[static_cast<std::size_t>(pr.j)]);
    const double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (ox > tol && oy > tol) {
      out.push_back({"overlap", els[static_cast<std::size_t>(pr.i)].path + "~" + els[static_cast<std::size_t>(pr.j)].path,
                     std::min(ox, oy)});
    }
  }

  const Rect space{-sol.design_space.width / 2, sol.design_space.width / 2, -sol.design_space.length / 2,
                   sol.design_space.length / 2};
  for (std::size_t k = 0; k < els.size(); ++k) {
    const int parent = system.elements[k].parent;
    const Rect outer = parent < 0 ? space : rect_of(els[static_cast<std::size_t>(parent)]);
    const Rect inner = rect_of(els[k]);
    const double excess = std::max({outer.x0 - inner.x0, inner.x1 - outer.x1, outer.y0 - inner.y0, inner.y1 - outer.y1});
    if (excess > tol) out.push_back({"containment", els[k].path, excess});
  }

  for (std::size_t k = 0; k < els.size(); ++k) {
    const ElementNode& e = system.elements[k];
    if (!e.is_component()) continue;
    const ElementPlacement& pl = els[k];
    const OrientationState state{*pl.m, *pl.n, *pl.r};
    const double want_w = state.r ? e.default_length : e.default_width;
    const double want_l = state.r ? e.default_width : e.default_length;
    const double dim_err = std::max(std::abs(pl.w - want_w), std::abs(pl.l - want_l));
    if (dim_err > tol) out.push_back({"dimensions", e.path, dim_err});
    for (int p : e.ports) {
      const PortNode& pn = system.ports[static_cast<std::size_t>(p)];
      const PortPlacement& pp = sol.ports[static_cast<std::size_t>(p)];
      const Offset want = transform_offset(pn.default_offset, state);
      const double err = std::max(std::abs(pp.a - want.a), std::abs(pp.b - want.b));
      if (err > tol) out.push_back({"port-transform", pn.path, err});
    }
  }

  auto port_edges = [&](int p) {
    const PortNode& pn = system.ports[static_cast<std::size_t>(p)];
    const ElementPlacement& owner = els[static_cast<std::size_t>(pn.element)];
    const PortPlacement& pp = sol.ports[static_cast<std::size_t>(p)];
    return edges_at(owner.w, owner.l, {pp.a, pp.b}, tol);
  };
  // Axis direction of a segment as an outward edge normal, if any.
  auto heading = [&](double dx, double dy) -> std::optional<Edge> {
    if (std::abs(dx) <= tol && std::abs(dy) <= tol) return std::nullopt;
    if (std::abs(dx) <= tol) return dy > 0 ? Edge::top : Edge::bottom;
    return dx > 0 ? Edge::right : Edge::left;
  };

  for (std::size_t k = 0; k < system.connections.size(); ++k) {
    const ConnectionNode& c = system.connections[k];
    if (c.domain != EnergyDomain::mechanical) continue;
    if (!c.same_level && !system.alignment[static_cast<std::size_t>(c.upper_port)]) continue;
    const std::string subject = sol.ports[static_cast<std::size_t>(c.from_port)].path + "~" +
                                sol.ports[static_cast<std::size_t>(c.to_port)].path;
    const PortPlacement& a = sol.ports[static_cast<std::size_t>(c.from_port)];
    const PortPlacement& b = sol.ports[static_cast<std::size_t>(c.to_port)];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    if (c.direct && std::max(std::abs(dx), std::abs(dy)) > tol) {
      out.push_back({"direct", subject, std::max(std::abs(dx), std::abs(dy))});
      continue;
    }
    if (std::min(std::abs(dx), std::abs(dy)) > tol) {
      out.push_back({"shaft", subject, std::min(std::abs(dx), std::abs(dy))});
      continue;
    }
    const std::vector<Edge> ea = port_edges(c.from_port);
    const std::vector<Edge> eb = port_edges(c.to_port);
    bool facing = false;
    if (c.same_level) {
      // The shaft leaves each port through that port's own edge.
      if (const auto h = heading(dx, dy)) {
        facing = contains(ea, *h) && contains(eb, opposite(*h));
      } else {
        for (Edge e : ea) facing = facing || contains(eb, opposite(e));
      }
    } else {
      // Internal port faces the same way as the subsystem port it feeds.
      const bool from_upper = c.upper_port == c.from_port;
      const std::vector<Edge>& eu = from_upper ? ea : eb;
      const std::vector<Edge>& el = from_upper ? eb : ea;
      const auto h = from_upper ? heading(-dx, -dy) : heading(dx, dy);
      if (h) {
        facing = contains(el, *h) && contains(eu, *h);
      } else {
        for (Edge e : el) facing = facing || contains(eu, e);
      }
    }
    if (!facing) out.push_back({"facing", subject, 0.0});
  }
  return out;
}

}  // namespace ptlayout::oracle
