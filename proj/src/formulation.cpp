#include "ptlayout/formulation.hpp"

#include <algorithm>
#include <cmath>

namespace ptlayout {

using milp::Sense;
using milp::Term;

std::string to_string(ObjectiveMode mode) { return mode == ObjectiveMode::l1 ? "l1" : "sq-l2-export"; }

BigM compute_big_m(const DesignSpace& space) { return {space.width + space.length}; }

std::string to_string(Logic logic) {
  switch (logic) {
    case Logic::free: return "~";
    case Logic::p: return "p";
    case Logic::not_p: return "1-p";
    case Logic::q: return "q";
    case Logic::not_q: return "1-q";
    case Logic::p_xor_q: return "p xor q";
    case Logic::p_xnor_q: return "p xnor q";
  }
  return "?";
}

std::optional<bool> evaluate(Logic logic, bool p, bool q) {
  switch (logic) {
    case Logic::free: return std::nullopt;
    case Logic::p: return p;
    case Logic::not_p: return !p;
    case Logic::q: return q;
    case Logic::not_q: return !q;
    case Logic::p_xor_q: return p != q;
    case Logic::p_xnor_q: return p == q;
  }
  return std::nullopt;
}

OrientationLogic orientation_logic(Edge default_edge, Perspective perspective) {
  const Edge column = perspective == Perspective::ego ? default_edge : opposite(default_edge);
  switch (column) {
    case Edge::top: return {Logic::free, Logic::q, Logic::p};
    case Edge::bottom: return {Logic::free, Logic::not_q, Logic::p};
    case Edge::right: return {Logic::p_xnor_q, Logic::free, Logic::not_p};
    case Edge::left: return {Logic::p_xor_q, Logic::free, Logic::not_p};
  }
  return {};
}

OrientationRequirement derive_orientation(Edge default_edge, bool p, bool q, Perspective perspective) {
  const OrientationLogic logic = orientation_logic(default_edge, perspective);
  return {evaluate(logic.m, p, q), evaluate(logic.n, p, q), evaluate(logic.r, p, q)};
}

Edge facing_edge(bool p, bool q, Perspective perspective) {
  const Edge ego = !p ? (!q ? Edge::top : Edge::bottom) : (!q ? Edge::right : Edge::left);
  return perspective == Perspective::ego ? ego : opposite(ego);
}

std::string row_family(const std::string& tag) { return tag.substr(0, tag.find('/')); }

namespace {

// Affine expression: sum(coef * var) + constant.
struct Lin {
  std::vector<Term> terms;
  double constant = 0.0;

  Lin& add(int var, double coef) {
    terms.push_back({var, coef});
    return *this;
  }
  Lin& add(double k) {
    constant += k;
    return *this;
  }
  Lin& add(const Lin& other, double scale) {
    for (const Term& t : other.terms) terms.push_back({t.var, t.coef * scale});
    constant += other.constant * scale;
    return *this;
  }
};

struct Box {
  Lin x, y, w, l;
};

class Builder {
 public:
  Builder(const ValidatedSystem& system, const FormulationOptions& options) : sys_(system), opt_(options) {
    out_.mode = options.objective;
    out_.big_m = options.big_m ? *options.big_m : compute_big_m(system.design_space).value;
    big_m_ = out_.big_m;
  }

  Formulation run() {
    create_variables();
    for (std::size_t e = 0; e < sys_.elements.size(); ++e) emit_containment(static_cast<int>(e));
    for (int s : sys_.subsystems())
      for (int port : elem(s).ports) emit_port_bounds(port);
    for (std::size_t e = 0; e < sys_.elements.size(); ++e) {
      if (!elem(static_cast<int>(e)).is_component()) continue;
      emit_rotation(static_cast<int>(e));
      for (int port : elem(static_cast<int>(e)).ports) emit_port_transform(port);
    }
    for (std::size_t z = 0; z < sys_.pairs.size(); ++z) emit_interference(static_cast<int>(z));
    for (std::size_t port = 0; port < sys_.ports.size(); ++port) emit_alignment(static_cast<int>(port));
    for (std::size_t c = 0; c < sys_.connections.size(); ++c) emit_port_coincidence(static_cast<int>(c));
    build_objective();

    std::stable_sort(rows_.begin(), rows_.end(),
                     [](const milp::Row& a, const milp::Row& b) { return row_family(a.tag) < row_family(b.tag); });
    for (milp::Row& row : rows_) out_.model.add_row(std::move(row.tag), std::move(row.terms), row.sense, row.rhs);
    return std::move(out_);
  }

 private:
  const ElementNode& elem(int e) const { return sys_.elements[static_cast<std::size_t>(e)]; }
  const PortNode& port(int p) const { return sys_.ports[static_cast<std::size_t>(p)]; }

  std::string pair_name(const InterferencePair& pr) const {
    return (pr.parent < 0 ? std::string("root") : elem(pr.parent).path) + ":" + std::to_string(pr.index);
  }
  std::string connection_name(const ConnectionNode& c) const {
    return port(c.from_port).path + "~" + port(c.to_port).path;
  }

  void create_variables() {
    const double hw = sys_.design_space.width / 2;
    const double hl = sys_.design_space.length / 2;
    milp::MilpModel& m = out_.model;
    VariableMap& v = out_.vars;
    v.elements.resize(sys_.elements.size());
    v.ports.resize(sys_.ports.size());

    for (std::size_t k = 0; k < sys_.elements.size(); ++k) {
      const ElementNode& e = sys_.elements[k];
      ElementVars& ev = v.elements[k];
      const FixedPose pose = e.fixed_pose.value_or(FixedPose{});
      ev.x = m.add_variable("x:" + e.path, pose.x.value_or(-hw), pose.x.value_or(hw));
      ev.y = m.add_variable("y:" + e.path, pose.y.value_or(-hl), pose.y.value_or(hl));
      if (e.is_component()) {
        const double lo = std::min(e.default_width, e.default_length);
        const double hi = std::max(e.default_width, e.default_length);
        if (pose.r) {
          const double w = *pose.r ? e.default_length : e.default_width;
          const double l = *pose.r ? e.default_width : e.default_length;
          ev.w = m.add_variable("w:" + e.path, w, w);
          ev.l = m.add_variable("l:" + e.path, l, l);
        } else {
          ev.w = m.add_variable("w:" + e.path, lo, hi);
          ev.l = m.add_variable("l:" + e.path, lo, hi);
        }
        auto binary = [&](const std::string& sym, const std::optional<bool>& fixed) {
          const int id = m.add_binary(sym + ":" + e.path);
          if (fixed) m.var(id).lower = m.var(id).upper = *fixed ? 1.0 : 0.0;
          return id;
        };
        ev.r = binary("r", pose.r);
        ev.m = binary("m", pose.m);
        ev.n = binary("n", pose.n);
        for (int p : e.ports) {
          const double half = hi / 2;
          v.ports[static_cast<std::size_t>(p)].a = m.add_variable("a:" + port(p).path, -half, half);
          v.ports[static_cast<std::size_t>(p)].b = m.add_variable("b:" + port(p).path, -half, half);
        }
      } else {
        ev.w = m.add_variable("w:" + e.path, 0.0, sys_.design_space.width);
        ev.l = m.add_variable("l:" + e.path, 0.0, sys_.design_space.length);
        for (int p : e.ports) {
          v.ports[static_cast<std::size_t>(p)].a = m.add_variable("a:" + port(p).path, -hw, hw);
          v.ports[static_cast<std::size_t>(p)].b = m.add_variable("b:" + port(p).path, -hl, hl);
        }
      }
    }
    for (const InterferencePair& pr : sys_.pairs) {
      const std::string name = pair_name(pr);
      v.pairs.push_back({m.add_binary("p:" + name), m.add_binary("q:" + name)});
    }
    for (const ConnectionNode& c : sys_.connections) {
      const std::string name = connection_name(c);
      ConnectionVars cv;
      if (opt_.objective == ObjectiveMode::l1) {
        cv.tx = m.add_variable("tx:" + name, 0.0, sys_.design_space.width);
        cv.ty = m.add_variable("ty:" + name, 0.0, sys_.design_space.length);
      } else {
        cv.dx = m.add_variable("dx:" + name, -sys_.design_space.width, sys_.design_space.width);
        cv.dy = m.add_variable("dy:" + name, -sys_.design_space.length, sys_.design_space.length);
      }
      v.connections.push_back(cv);
    }
  }

  Lin var(int id) const { return Lin{}.add(id, 1.0); }

  Box box(int e) const {
    if (e < 0) {
      return {Lin{}, Lin{}, Lin{}.add(sys_.design_space.width), Lin{}.add(sys_.design_space.length)};
    }
    const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(e)];
    return {var(ev.x), var(ev.y), var(ev.w), var(ev.l)};
  }

  // Absolute port position (x_e + a, y_e + b).
  std::pair<Lin, Lin> port_position(int p) const {
    const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(port(p).element)];
    const PortVars& pv = out_.vars.ports[static_cast<std::size_t>(p)];
    return {Lin{}.add(ev.x, 1.0).add(pv.a, 1.0), Lin{}.add(ev.y, 1.0).add(pv.b, 1.0)};
  }

  void row(std::string tag, const Lin& lhs, Sense sense, double rhs) {
    rows_.push_back({std::move(tag), lhs.terms, sense, rhs - lhs.constant});
  }

  static std::string tag(int family, int level, const std::string& subject, const std::string& r) {
    return "eq" + std::to_string(family) + "/" + std::to_string(level) + "/" + subject + "/" + r;
  }

  void emit_containment(int child) {
    const ElementNode& e = elem(child);
    const Box p = box(e.parent);
    const Box c = box(child);
    // x_P - x_c + w_c/2 - w_P/2 <= 0 and x_P - x_c - w_c/2 + w_P/2 >= 0
    auto pair_rows = [&](const Lin& xp, const Lin& xc, const Lin& wc, const Lin& wp, const char* lo, const char* hi) {
      Lin left = Lin{}.add(xp, 1).add(xc, -1).add(wc, 0.5).add(wp, -0.5);
      row(tag(1, e.level, e.path, lo), left, Sense::less_equal, 0.0);
      Lin right = Lin{}.add(xp, 1).add(xc, -1).add(wc, -0.5).add(wp, 0.5);
      row(tag(1, e.level, e.path, hi), right, Sense::greater_equal, 0.0);
    };
    pair_rows(p.x, c.x, c.w, p.w, "a", "b");
    pair_rows(p.y, c.y, c.l, p.l, "c", "d");
  }

  void emit_port_bounds(int p) {
    const ElementNode& e = elem(port(p).element);
    const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(port(p).element)];
    const PortVars& pv = out_.vars.ports[static_cast<std::size_t>(p)];
    const std::string& path = port(p).path;
    row(tag(2, e.level, path, "a"), Lin{}.add(pv.a, 1).add(ev.w, -0.5), Sense::less_equal, 0.0);
    row(tag(2, e.level, path, "b"), Lin{}.add(pv.a, 1).add(ev.w, 0.5), Sense::greater_equal, 0.0);
    row(tag(2, e.level, path, "c"), Lin{}.add(pv.b, 1).add(ev.l, -0.5), Sense::less_equal, 0.0);
    row(tag(2, e.level, path, "d"), Lin{}.add(pv.b, 1).add(ev.l, 0.5), Sense::greater_equal, 0.0);
  }

  void emit_rotation(int c) {
    const ElementNode& e = elem(c);
    if (e.fixed_pose && e.fixed_pose->r) return;  // w, l already fixed by bounds
    const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(c)];
    const double wb = e.default_width;
    const double lb = e.default_length;
    row(tag(3, e.level, e.path, "a"), Lin{}.add(ev.w, 1).add(ev.r, -(lb - wb)), Sense::equal, wb);
    row(tag(3, e.level, e.path, "b"), Lin{}.add(ev.l, 1).add(ev.r, -(wb - lb)), Sense::equal, lb);
  }

  void emit_port_transform(int p) {
    const PortNode& pn = port(p);
    const ElementNode& e = elem(pn.element);
    const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(pn.element)];
    const PortVars& pv = out_.vars.ports[static_cast<std::size_t>(p)];
    const double ab = pn.default_offset.a;
    const double bb = pn.default_offset.b;
    const double M = big_m_;
    const std::string& s = pn.path;
    // r = 0: a = ā(1-2m), b = b̄(1-2n);  r = 1: a = b̄(1-2n), b = -ā(1-2m)
    row(tag(4, e.level, s, "a"), Lin{}.add(pv.a, 1).add(ev.m, 2 * ab).add(ev.r, M), Sense::greater_equal, ab);
    row(tag(4, e.level, s, "b"), Lin{}.add(pv.a, 1).add(ev.m, 2 * ab).add(ev.r, -M), Sense::less_equal, ab);
    row(tag(4, e.level, s, "c"), Lin{}.add(pv.a, 1).add(ev.n, 2 * bb).add(ev.r, -M), Sense::greater_equal, bb - M);
    row(tag(4, e.level, s, "d"), Lin{}.add(pv.a, 1).add(ev.n, 2 * bb).add(ev.r, M), Sense::less_equal, bb + M);
    row(tag(4, e.level, s, "e"), Lin{}.add(pv.b, 1).add(ev.n, 2 * bb).add(ev.r, M), Sense::greater_equal, bb);
    row(tag(4, e.level, s, "f"), Lin{}.add(pv.b, 1).add(ev.n, 2 * bb).add(ev.r, -M), Sense::less_equal, bb);
    row(tag(4, e.level, s, "g"), Lin{}.add(pv.b, 1).add(ev.m, -2 * ab).add(ev.r, -M), Sense::greater_equal, -ab - M);
    row(tag(4, e.level, s, "h"), Lin{}.add(pv.b, 1).add(ev.m, -2 * ab).add(ev.r, M), Sense::less_equal, -ab + M);
  }

  void emit_interference(int z) {
    const InterferencePair& pr = sys_.pairs[static_cast<std::size_t>(z)];
    const PairVars& pq = out_.vars.pairs[static_cast<std::size_t>(z)];
    const Box bi = box(pr.i);
    const Box bj = box(pr.j);
    const double M = big_m_;
    const std::string s = elem(pr.i).path + "~" + elem(pr.j).path;
    const int level = elem(pr.i).level;
    // (0,0) j above i, (0,1) j below, (1,0) j right, (1,1) j left
    Lin above = Lin{}.add(bj.y, 1).add(bj.l, -0.5).add(bi.y, -1).add(bi.l, -0.5).add(pq.p, M).add(pq.q, M);
    row(tag(5, level, s, "a"), above, Sense::greater_equal, 0.0);
    Lin below = Lin{}.add(bj.y, 1).add(bj.l, 0.5).add(bi.y, -1).add(bi.l, 0.5).add(pq.p, -M).add(pq.q, M);
    row(tag(5, level, s, "b"), below, Sense::less_equal, M);
    Lin right = Lin{}.add(bj.x, 1).add(bj.w, -0.5).add(bi.x, -1).add(bi.w, -0.5).add(pq.p, -M).add(pq.q, M);
    row(tag(5, level, s, "c"), right, Sense::greater_equal, -M);
    Lin left = Lin{}.add(bj.x, 1).add(bj.w, 0.5).add(bi.x, -1).add(bi.w, 0.5).add(pq.p, M).add(pq.q, M);
    row(tag(5, level, s, "d"), left, Sense::less_equal, 2 * M);
  }

  // Linear rows forcing binary `target` to follow `logic` of (p, q).
  void logic_rows(const std::string& base, const std::string& name, int target, Logic logic, const PairVars& pq) {
    const int p = pq.p;
    const int q = pq.q;
    switch (logic) {
      case Logic::free: return;
      case Logic::p: row(base + name, Lin{}.add(target, 1).add(p, -1), Sense::equal, 0.0); return;
      case Logic::not_p: row(base + name, Lin{}.add(target, 1).add(p, 1), Sense::equal, 1.0); return;
      case Logic::q: row(base + name, Lin{}.add(target, 1).add(q, -1), Sense::equal, 0.0); return;
      case Logic::not_q: row(base + name, Lin{}.add(target, 1).add(q, 1), Sense::equal, 1.0); return;
      case Logic::p_xor_q:
        row(base + name + "1", Lin{}.add(target, 1).add(p, -1).add(q, 1), Sense::greater_equal, 0.0);
        row(base + name + "2", Lin{}.add(target, 1).add(p, 1).add(q, -1), Sense::greater_equal, 0.0);
        row(base + name + "3", Lin{}.add(target, 1).add(p, -1).add(q, -1), Sense::less_equal, 0.0);
        row(base + name + "4", Lin{}.add(target, 1).add(p, 1).add(q, 1), Sense::less_equal, 2.0);
        return;
      case Logic::p_xnor_q:
        row(base + name + "1", Lin{}.add(target, 1).add(p, 1).add(q, 1), Sense::greater_equal, 1.0);
        row(base + name + "2", Lin{}.add(target, 1).add(p, -1).add(q, -1), Sense::greater_equal, -1.0);
        row(base + name + "3", Lin{}.add(target, 1).add(p, -1).add(q, 1), Sense::less_equal, 1.0);
        row(base + name + "4", Lin{}.add(target, 1).add(p, 1).add(q, -1), Sense::less_equal, 1.0);
        return;
    }
  }

  // Orientation rows for component ports, edge rows for subsystem ports.
  void emit_alignment(int p) {
    const auto& ctx = sys_.alignment[static_cast<std::size_t>(p)];
    if (!ctx) return;
    const PortNode& pn = port(p);
    const ElementNode& e = elem(pn.element);
    const PairVars& pq = out_.vars.pairs[static_cast<std::size_t>(ctx->pair)];
    if (e.is_component()) {
      const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(pn.element)];
      const OrientationLogic logic = orientation_logic(*pn.default_edge, ctx->perspective);
      const std::string base = "eq6/" + std::to_string(e.level) + "/" + pn.path + "/";
      logic_rows(base, "r", ev.r, logic.r, pq);
      logic_rows(base, "m", ev.m, logic.m, pq);
      logic_rows(base, "n", ev.n, logic.n, pq);
    } else {
      emit_subsystem_port_edge(p, pq, ctx->perspective);
    }
  }

  void emit_subsystem_port_edge(int p, const PairVars& pq, Perspective perspective) {
    const PortNode& pn = port(p);
    const ElementNode& e = elem(pn.element);
    const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(pn.element)];
    const PortVars& pv = out_.vars.ports[static_cast<std::size_t>(p)];
    const double M = big_m_;
    const std::string& s = pn.path;
    if (perspective == Perspective::ego) {
      row(tag(7, e.level, s, "a"), Lin{}.add(pv.b, 1).add(ev.l, -0.5).add(pq.p, M).add(pq.q, M), Sense::greater_equal, 0.0);
      row(tag(7, e.level, s, "b"), Lin{}.add(pv.b, 1).add(ev.l, 0.5).add(pq.p, -M).add(pq.q, M), Sense::less_equal, M);
      row(tag(7, e.level, s, "c"), Lin{}.add(pv.a, 1).add(ev.w, -0.5).add(pq.p, -M).add(pq.q, M), Sense::greater_equal, -M);
      row(tag(7, e.level, s, "d"), Lin{}.add(pv.a, 1).add(ev.w, 0.5).add(pq.p, M).add(pq.q, M), Sense::less_equal, 2 * M);
    } else {
      row(tag(9, e.level, s, "a"), Lin{}.add(pv.b, 1).add(ev.l, 0.5).add(pq.p, -M).add(pq.q, -M), Sense::less_equal, 0.0);
      row(tag(9, e.level, s, "b"), Lin{}.add(pv.b, 1).add(ev.l, -0.5).add(pq.p, M).add(pq.q, -M), Sense::greater_equal, -M);
      row(tag(9, e.level, s, "c"), Lin{}.add(pv.a, 1).add(ev.w, 0.5).add(pq.p, M).add(pq.q, -M), Sense::less_equal, M);
      row(tag(9, e.level, s, "d"), Lin{}.add(pv.a, 1).add(ev.w, -0.5).add(pq.p, -M).add(pq.q, -M), Sense::greater_equal, -2 * M);
    }
  }

  void emit_port_coincidence(int k) {
    const ConnectionNode& c = sys_.connections[static_cast<std::size_t>(k)];
    if (c.domain != EnergyDomain::mechanical) return;
    const auto [x1, y1] = port_position(c.from_port);
    const auto [x2, y2] = port_position(c.to_port);
    const Lin dx = Lin{}.add(x1, 1).add(x2, -1);
    const Lin dy = Lin{}.add(y1, 1).add(y2, -1);
    const std::string s = connection_name(c);
    if (c.direct) {
      row(tag(8, c.level, s, "a"), dy, Sense::greater_equal, 0.0);
      row(tag(8, c.level, s, "b"), dy, Sense::less_equal, 0.0);
      row(tag(8, c.level, s, "c"), dx, Sense::greater_equal, 0.0);
      row(tag(8, c.level, s, "d"), dx, Sense::less_equal, 0.0);
      return;
    }
    int pair = c.pair;
    if (!c.same_level) {
      const auto& ctx = sys_.alignment[static_cast<std::size_t>(c.upper_port)];
      pair = ctx ? ctx->pair : -1;
    }
    if (pair < 0) return;
    const int p = out_.vars.pairs[static_cast<std::size_t>(pair)].p;
    const double M = big_m_;
    // p = 1: equal y (side by side); p = 0: equal x (stacked)
    row(tag(8, c.level, s, "a"), Lin{}.add(dy, 1).add(p, -M), Sense::greater_equal, -M);
    row(tag(8, c.level, s, "b"), Lin{}.add(dy, 1).add(p, M), Sense::less_equal, M);
    row(tag(8, c.level, s, "c"), Lin{}.add(dx, 1).add(p, M), Sense::greater_equal, 0.0);
    row(tag(8, c.level, s, "d"), Lin{}.add(dx, 1).add(p, -M), Sense::less_equal, 0.0);
  }

  void build_objective() {
    milp::MilpModel& m = out_.model;
    for (std::size_t k = 0; k < sys_.connections.size(); ++k) {
      const ConnectionNode& c = sys_.connections[k];
      const ConnectionVars& cv = out_.vars.connections[k];
      const auto [x1, y1] = port_position(c.from_port);
      const auto [x2, y2] = port_position(c.to_port);
      const Lin dx = Lin{}.add(x1, 1).add(x2, -1);
      const Lin dy = Lin{}.add(y1, 1).add(y2, -1);
      const std::string s = "obj/" + std::to_string(c.level) + "/" + connection_name(c) + "/";
      if (out_.mode == ObjectiveMode::l1) {
        row(s + "a", Lin{}.add(cv.tx, 1).add(dx, -1), Sense::greater_equal, 0.0);
        row(s + "b", Lin{}.add(cv.tx, 1).add(dx, 1), Sense::greater_equal, 0.0);
        row(s + "c", Lin{}.add(cv.ty, 1).add(dy, -1), Sense::greater_equal, 0.0);
        row(s + "d", Lin{}.add(cv.ty, 1).add(dy, 1), Sense::greater_equal, 0.0);
        m.add_objective(cv.tx, 1.0);
        m.add_objective(cv.ty, 1.0);
      } else {
        row(s + "a", Lin{}.add(cv.dx, 1).add(dx, -1), Sense::equal, 0.0);
        row(s + "b", Lin{}.add(cv.dy, 1).add(dy, -1), Sense::equal, 0.0);
        m.add_quadratic(cv.dx, cv.dx, 1.0);
        m.add_quadratic(cv.dy, cv.dy, 1.0);
      }
    }
    for (int s : sys_.subsystems()) {
      const ElementVars& ev = out_.vars.elements[static_cast<std::size_t>(s)];
      m.add_objective(ev.w, 1.0);
      m.add_objective(ev.l, 1.0);
    }
  }

  const ValidatedSystem& sys_;
  FormulationOptions opt_;
  Formulation out_;
  double big_m_ = 0.0;
  std::vector<milp::Row> rows_;
};

}  // namespace

Formulation build_formulation(const ValidatedSystem& system, const FormulationOptions& options) {
  return Builder(system, options).run();
}

// ---------------------------------------------------------------------------

PlacementSolution decode_solution(const ValidatedSystem& system, const Formulation& f, const std::vector<double>& x) {
  auto val = [&](int id) { return x.at(static_cast<std::size_t>(id)); };
  auto bit = [&](int id) { return val(id) > 0.5; };
  PlacementSolution out;
  out.design_space = system.design_space;
  out.mode = f.mode;
  for (std::size_t k = 0; k < system.elements.size(); ++k) {
    const ElementNode& e = system.elements[k];
    const ElementVars& ev = f.vars.elements[k];
    ElementPlacement pl;
    pl.path = e.path;
    pl.kind = e.kind;
    pl.x = val(ev.x);
    pl.y = val(ev.y);
    pl.w = val(ev.w);
    pl.l = val(ev.l);
    if (e.is_component()) {
      pl.m = bit(ev.m);
      pl.n = bit(ev.n);
      pl.r = bit(ev.r);
    } else {
      out.j_dim += pl.w + pl.l;
    }
    out.elements.push_back(pl);
  }
  for (std::size_t k = 0; k < system.ports.size(); ++k) {
    const PortNode& p = system.ports[k];
    const PortVars& pv = f.vars.ports[k];
    const ElementPlacement& owner = out.elements[static_cast<std::size_t>(p.element)];
    PortPlacement pp;
    pp.path = p.path;
    pp.a = val(pv.a);
    pp.b = val(pv.b);
    pp.x = owner.x + pp.a;
    pp.y = owner.y + pp.b;
    out.ports.push_back(pp);
  }
  for (const ConnectionNode& c : system.connections) {
    const PortPlacement& a = out.ports[static_cast<std::size_t>(c.from_port)];
    const PortPlacement& b = out.ports[static_cast<std::size_t>(c.to_port)];
    ConnectionRoute route;
    route.from = a.path;
    route.to = b.path;
    route.domain = c.domain;
    route.direct = c.direct;
    route.dx = a.x - b.x;
    route.dy = a.y - b.y;
    route.length_l1 = std::abs(route.dx) + std::abs(route.dy);
    route.length_euclidean = std::hypot(route.dx, route.dy);
    out.j_con += f.mode == ObjectiveMode::l1 ? route.length_l1 : route.dx * route.dx + route.dy * route.dy;
    out.connections.push_back(route);
  }
  for (int j = 0; j < f.model.num_vars(); ++j) out.variables.emplace_back(f.model.var(j).name, val(j));
  return out;
}

milp::BinaryProposal placement_heuristic(const ValidatedSystem& system, const Formulation& f) {
  return [&system, &f](const std::vector<double>& lp) -> std::optional<std::vector<double>> {
    std::vector<double> x = lp;
    auto val = [&](int id) { return lp[static_cast<std::size_t>(id)]; };
    std::vector<std::pair<bool, bool>> placed(system.pairs.size());
    for (std::size_t z = 0; z < system.pairs.size(); ++z) {
      const InterferencePair& pr = system.pairs[z];
      const ElementVars& a = f.vars.elements[static_cast<std::size_t>(pr.i)];
      const ElementVars& b = f.vars.elements[static_cast<std::size_t>(pr.j)];
      const double dx = val(b.x) - val(a.x);
      const double dy = val(b.y) - val(a.y);
      // Separation along each axis; the larger one (least overlap) wins.
      const double sx = std::abs(dx) - (val(a.w) + val(b.w)) / 2;
      const double sy = std::abs(dy) - (val(a.l) + val(b.l)) / 2;
      const bool p = sx > sy;
      const bool q = p ? dx < 0 : dy < 0;
      placed[z] = {p, q};
      x[static_cast<std::size_t>(f.vars.pairs[z].p)] = p;
      x[static_cast<std::size_t>(f.vars.pairs[z].q)] = q;
    }
    for (std::size_t k = 0; k < system.elements.size(); ++k) {
      const ElementVars& ev = f.vars.elements[k];
      if (ev.r < 0) continue;
      for (int id : {ev.r, ev.m, ev.n}) x[static_cast<std::size_t>(id)] = std::round(val(id));
    }
    for (std::size_t k = 0; k < system.ports.size(); ++k) {
      const auto& ctx = system.alignment[k];
      const PortNode& pn = system.ports[k];
      const ElementNode& e = system.elements[static_cast<std::size_t>(pn.element)];
      if (!ctx || !e.is_component()) continue;
      const auto [p, q] = placed[static_cast<std::size_t>(ctx->pair)];
      const OrientationRequirement req = derive_orientation(*pn.default_edge, p, q, ctx->perspective);
      const ElementVars& ev = f.vars.elements[static_cast<std::size_t>(pn.element)];
      auto set = [&](int id, const std::optional<bool>& want) {
        const milp::Variable& v = f.model.var(id);
        if (want && v.lower != v.upper) x[static_cast<std::size_t>(id)] = *want;
      };
      set(ev.m, req.m);
      set(ev.n, req.n);
      set(ev.r, req.r);
    }
    return x;
  };
}

}  // namespace ptlayout
