#include "ptlayout/system.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace ptlayout {

std::string to_string(EnergyDomain d) { return d == EnergyDomain::mechanical ? "mechanical" : "electrical"; }
std::string to_string(ElementKind k) { return k == ElementKind::component ? "component" : "subsystem"; }
std::string to_string(ConnectionKind k) { return k == ConnectionKind::direct ? "direct" : "indirect"; }
std::string to_string(Perspective p) { return p == Perspective::ego ? "ego" : "connecting"; }

std::string to_string(Edge e) {
  switch (e) {
    case Edge::top: return "top";
    case Edge::bottom: return "bottom";
    case Edge::right: return "right";
    case Edge::left: return "left";
  }
  return "?";
}

Edge opposite(Edge e) {
  switch (e) {
    case Edge::top: return Edge::bottom;
    case Edge::bottom: return Edge::top;
    case Edge::right: return Edge::left;
    case Edge::left: return Edge::right;
  }
  return e;
}

namespace {

std::string join_messages(const std::vector<Issue>& issues) {
  std::string out = "invalid system description";
  for (const Issue& i : issues) out += "\n  " + i.code + ": " + i.message;
  return out;
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](char c) {
    return c == '.' || c == ' ' || c == '\t' || c == '\n' || c == '/';
  });
}

std::string child_path(const std::string& parent, const std::string& id) {
  return parent.empty() ? id : parent + "." + id;
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : std::runtime_error(join_messages(issues)), issues_(std::move(issues)) {}

bool ValidationError::has(const std::string& code) const {
  return std::any_of(issues_.begin(), issues_.end(), [&](const Issue& i) { return i.code == code; });
}

std::optional<Edge> boundary_edge(double width, double length, Offset offset, double tol) {
  const double scale = std::max({1.0, width, length});
  const double eps = tol * scale;
  if (std::abs(offset.a) > width / 2 + eps || std::abs(offset.b) > length / 2 + eps) return std::nullopt;
  std::optional<Edge> found;
  int hits = 0;
  auto test = [&](bool on, Edge e) {
    if (on) {
      ++hits;
      found = e;
    }
  };
  test(std::abs(offset.b - length / 2) <= eps, Edge::top);
  test(std::abs(offset.b + length / 2) <= eps, Edge::bottom);
  test(std::abs(offset.a - width / 2) <= eps, Edge::right);
  test(std::abs(offset.a + width / 2) <= eps, Edge::left);
  if (hits != 1) return std::nullopt;
  return found;
}

// ---------------------------------------------------------------------------

std::optional<int> ValidatedSystem::find_element(const std::string& path) const {
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if (elements[k].path == path) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::optional<int> ValidatedSystem::find_port(const std::string& element_path, const std::string& port) const {
  auto e = find_element(element_path);
  if (!e) return std::nullopt;
  for (int p : elements[static_cast<std::size_t>(*e)].ports) {
    if (ports[static_cast<std::size_t>(p)].id == port) return p;
  }
  return std::nullopt;
}

std::vector<int> ValidatedSystem::elements_at_level(int level) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if (elements[k].level == level) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> ValidatedSystem::subsystems() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if (elements[k].kind == ElementKind::subsystem) out.push_back(static_cast<int>(k));
  }
  return out;
}

const std::vector<int>& ValidatedSystem::children_of(int parent) const {
  return parent < 0 ? top_level : elements.at(static_cast<std::size_t>(parent)).children;
}

std::vector<int> ValidatedSystem::pairs_of(int parent) const {
  std::vector<int> out;
  for (std::size_t z = 0; z < pairs.size(); ++z) {
    if (pairs[z].parent == parent) out.push_back(static_cast<int>(z));
  }
  return out;
}

std::optional<int> ValidatedSystem::pair_between(int a, int b) const {
  for (std::size_t z = 0; z < pairs.size(); ++z) {
    const auto& p = pairs[z];
    if ((p.i == a && p.j == b) || (p.i == b && p.j == a)) return static_cast<int>(z);
  }
  return std::nullopt;
}

std::vector<InterferencePair> interference_pairs(const ValidatedSystem& system, int parent) {
  const std::vector<int>& kids = system.children_of(parent);
  std::vector<InterferencePair> out;
  int index = 0;
  for (std::size_t a = 0; a < kids.size(); ++a) {
    for (std::size_t b = a + 1; b < kids.size(); ++b) {
      out.push_back({parent, kids[a], kids[b], index++});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

class Validator {
 public:
  explicit Validator(const SystemDescription& d) : desc_(d) {}

  ValidatedSystem run() {
    sys_.design_space = desc_.design_space;
    if (!(desc_.design_space.width > 0.0) || !(desc_.design_space.length > 0.0)) {
      issue("non-positive design space", "design space dimensions must be positive");
    }
    if (desc_.elements.empty()) issue("no elements", "the system declares no elements");

    check_unique_ids(desc_.elements, "top level");
    for (std::size_t k = 0; k < desc_.elements.size(); ++k) {
      const int idx = flatten(desc_.elements[k], -1, 0, "", static_cast<int>(k));
      sys_.top_level.push_back(idx);
    }
    for (const ElementNode& e : sys_.elements) sys_.n_levels = std::max(sys_.n_levels, e.level);

    for (const Connection& c : desc_.connections) resolve(c);

    sys_.pairs = interference_pairs(sys_, -1);
    for (std::size_t k = 0; k < sys_.elements.size(); ++k) {
      if (sys_.elements[k].kind == ElementKind::subsystem) {
        auto more = interference_pairs(sys_, static_cast<int>(k));
        sys_.pairs.insert(sys_.pairs.end(), more.begin(), more.end());
      }
    }
    assign_alignment();

    if (!issues_.empty()) throw ValidationError(issues_);
    return std::move(sys_);
  }

 private:
  void issue(std::string code, std::string message) { issues_.push_back({std::move(code), std::move(message)}); }

  void check_unique_ids(const std::vector<ElementSpec>& list, const std::string& where) {
    std::set<std::string> seen;
    for (const ElementSpec& e : list) {
      if (!seen.insert(e.id).second) issue("duplicate id", "element id '" + e.id + "' repeated in " + where);
    }
  }

  int flatten(const ElementSpec& spec, int parent, int level, const std::string& parent_path, int sibling_index) {
    const std::string path = child_path(parent_path, spec.id);
    if (!valid_id(spec.id)) issue("invalid id", "element id '" + spec.id + "' must be non-empty without '.', '/' or spaces");

    const int idx = static_cast<int>(sys_.elements.size());
    ElementNode node;
    node.id = spec.id;
    node.path = path;
    node.kind = spec.kind;
    node.level = level;
    node.parent = parent;
    node.sibling_index = sibling_index;
    node.default_width = spec.default_width;
    node.default_length = spec.default_length;
    node.fixed_pose = spec.fixed_pose;
    sys_.elements.push_back(node);
    path_index_[path] = idx;

    if (spec.kind == ElementKind::component) {
      if (!spec.children.empty()) issue("component with children", "component '" + path + "' declares child elements");
      if (!(spec.default_width > 0.0) || !(spec.default_length > 0.0)) {
        issue("non-positive dimensions", "component '" + path + "' needs positive width and length");
      }
    } else {
      if (spec.children.size() < 2) {
        issue("subsystem with fewer than two children", "subsystem '" + path + "' must contain at least two elements");
      }
      if (spec.default_width != 0.0 || spec.default_length != 0.0) {
        issue("subsystem with dimensions", "subsystem '" + path + "' dimensions are decision variables");
      }
      if (spec.fixed_pose && (spec.fixed_pose->m || spec.fixed_pose->n || spec.fixed_pose->r)) {
        issue("fixed orientation on subsystem", "subsystem '" + path + "' cannot be rotated or mirrored");
      }
    }

    std::set<std::string> port_ids;
    for (const PortSpec& p : spec.ports) {
      const std::string ppath = path + "." + p.id;
      if (!valid_id(p.id)) issue("invalid id", "port id '" + p.id + "' on '" + path + "' is not a plain identifier");
      if (!port_ids.insert(p.id).second) issue("duplicate id", "port '" + ppath + "' declared twice");
      PortNode port;
      port.id = p.id;
      port.path = ppath;
      port.element = idx;
      port.domain = p.domain;
      port.connection_kind = p.connection_kind;
      if (spec.kind == ElementKind::component) {
        if (!p.default_offset) {
          issue("missing port offset", "component port '" + ppath + "' needs an offset");
        } else {
          port.default_offset = *p.default_offset;
          const double hw = spec.default_width / 2;
          const double hl = spec.default_length / 2;
          const double eps = 1e-9 * std::max({1.0, spec.default_width, spec.default_length});
          if (p.domain == EnergyDomain::mechanical) {
            port.default_edge = boundary_edge(spec.default_width, spec.default_length, port.default_offset);
            if (!port.default_edge) {
              const bool inside = std::abs(port.default_offset.a) <= hw + eps && std::abs(port.default_offset.b) <= hl + eps;
              const bool corner = inside && std::abs(std::abs(port.default_offset.a) - hw) <= eps &&
                                  std::abs(std::abs(port.default_offset.b) - hl) <= eps;
              issue(corner ? "ambiguous port edge" : "port not on boundary",
                    "mechanical port '" + ppath + "' must lie on exactly one edge of the footprint");
            }
          } else if (std::abs(port.default_offset.a) > hw + eps || std::abs(port.default_offset.b) > hl + eps) {
            issue("port outside element", "port '" + ppath + "' lies outside the footprint");
          }
        }
      } else if (p.default_offset) {
        issue("subsystem port offset", "subsystem port '" + ppath + "' location is a decision variable");
      }
      sys_.elements[static_cast<std::size_t>(idx)].ports.push_back(static_cast<int>(sys_.ports.size()));
      sys_.ports.push_back(port);
    }

    check_unique_ids(spec.children, "'" + path + "'");
    std::vector<int> kids;
    for (std::size_t k = 0; k < spec.children.size(); ++k) {
      kids.push_back(flatten(spec.children[k], idx, level + 1, path, static_cast<int>(k)));
    }
    sys_.elements[static_cast<std::size_t>(idx)].children = std::move(kids);
    return idx;
  }

  std::optional<int> lookup(const PortRef& ref) {
    auto it = path_index_.find(ref.element);
    if (it == path_index_.end()) return std::nullopt;
    for (int p : sys_.elements[static_cast<std::size_t>(it->second)].ports) {
      if (sys_.ports[static_cast<std::size_t>(p)].id == ref.port) return p;
    }
    return std::nullopt;
  }

  void resolve(const Connection& c) {
    const std::string label = c.from.str() + " -> " + c.to.str();
    auto from = lookup(c.from);
    auto to = lookup(c.to);
    if (!from || !to) {
      issue("dangling port reference", "connection " + label + " references an unknown port");
      return;
    }
    const PortNode& pf = sys_.ports[static_cast<std::size_t>(*from)];
    const PortNode& pt = sys_.ports[static_cast<std::size_t>(*to)];
    if (!joined_.insert({std::min(*from, *to), std::max(*from, *to)}).second) {
      issue("duplicate connection", "connection " + label + " is declared more than once");
      return;
    }
    if (pf.element == pt.element) {
      issue("self connection", "connection " + label + " joins an element to itself");
      return;
    }
    if (pf.domain != pt.domain) {
      issue("domain mismatch", "connection " + label + " joins " + to_string(pf.domain) + " and " + to_string(pt.domain) + " ports");
      return;
    }
    const ElementNode& ef = sys_.elements[static_cast<std::size_t>(pf.element)];
    const ElementNode& et = sys_.elements[static_cast<std::size_t>(pt.element)];

    ConnectionNode node;
    node.from_port = *from;
    node.to_port = *to;
    node.domain = pf.domain;
    node.direct = pf.connection_kind == ConnectionKind::direct || pt.connection_kind == ConnectionKind::direct;
    if (ef.level == et.level) {
      node.same_level = true;
      node.level = ef.level;
      if (node.domain == EnergyDomain::mechanical && ef.parent != et.parent) {
        issue("mechanical connection across subsystems", "connection " + label + " joins elements with different parents");
        return;
      }
    } else {
      node.same_level = false;
      const bool from_upper = ef.level < et.level;
      const ElementNode& upper = from_upper ? ef : et;
      const ElementNode& lower = from_upper ? et : ef;
      const int upper_idx = from_upper ? pf.element : pt.element;
      if (lower.parent != upper_idx) {
        issue("inter-level connection not parent-to-own-child",
              "connection " + label + " must join a subsystem port to one of its own children");
        return;
      }
      node.level = upper.level;
      node.upper_port = from_upper ? *from : *to;
      node.lower_port = from_upper ? *to : *from;
    }
    sys_.connections.push_back(node);
  }

  void assign_alignment() {
    sys_.alignment.assign(sys_.ports.size(), std::nullopt);
    auto set = [&](int port, AlignmentContext ctx) {
      auto& slot = sys_.alignment[static_cast<std::size_t>(port)];
      if (slot) {
        issue("conflicting alignment", "mechanical port '" + sys_.ports[static_cast<std::size_t>(port)].path +
                                           "' takes part in more than one shaft alignment");
        return;
      }
      slot = ctx;
    };
    for (ConnectionNode& c : sys_.connections) {
      if (!c.same_level) continue;
      const int ef = sys_.ports[static_cast<std::size_t>(c.from_port)].element;
      const int et = sys_.ports[static_cast<std::size_t>(c.to_port)].element;
      if (auto z = sys_.pair_between(ef, et)) c.pair = *z;
      if (c.domain != EnergyDomain::mechanical) continue;
      const InterferencePair& pair = sys_.pairs[static_cast<std::size_t>(c.pair)];
      for (int port : {c.from_port, c.to_port}) {
        const int e = sys_.ports[static_cast<std::size_t>(port)].element;
        set(port, {c.pair, e == pair.i ? Perspective::ego : Perspective::connecting});
      }
    }
    // Internal ports inherit the alignment of the subsystem port they feed,
    // resolved from the top level downward.
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < sys_.connections.size(); ++k) {
      const auto& c = sys_.connections[k];
      if (!c.same_level && c.domain == EnergyDomain::mechanical) order.push_back(k);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sys_.connections[a].level < sys_.connections[b].level;
    });
    for (std::size_t k : order) {
      const auto& c = sys_.connections[k];
      const auto& ctx = sys_.alignment[static_cast<std::size_t>(c.upper_port)];
      if (ctx) set(c.lower_port, *ctx);
    }
  }

  const SystemDescription& desc_;
  ValidatedSystem sys_;
  std::vector<Issue> issues_;
  std::unordered_map<std::string, int> path_index_;
  std::set<std::pair<int, int>> joined_;
};

}  // namespace

ValidatedSystem validate(const SystemDescription& description) { return Validator(description).run(); }

// ---------------------------------------------------------------------------
// Grouping
// ---------------------------------------------------------------------------

namespace {

ElementSpec* find_spec(std::vector<ElementSpec>& list, const std::string& path) {
  const auto dot = path.find('.');
  const std::string head = path.substr(0, dot);
  for (ElementSpec& e : list) {
    if (e.id != head) continue;
    if (dot == std::string::npos) return &e;
    return find_spec(e.children, path.substr(dot + 1));
  }
  return nullptr;
}

bool same_shape(const ElementSpec& a, const ElementSpec& b) {
  return a.kind == b.kind && a.default_width == b.default_width && a.default_length == b.default_length &&
         a.ports == b.ports && a.children.empty() && b.children.empty() && !a.fixed_pose && !b.fixed_pose;
}

}  // namespace

SystemDescription group_elements(const SystemDescription& description, const std::vector<GroupingDirective>& directives) {
  SystemDescription out = description;
  for (const GroupingDirective& dir : directives) {
    std::vector<Issue> issues;
    auto fail = [&](std::string code, std::string message) {
      issues.push_back({std::move(code), std::move(message)});
      throw ValidationError(issues);
    };
    ElementSpec* sub = find_spec(out.elements, dir.subsystem);
    if (sub == nullptr || sub->kind != ElementKind::subsystem) {
      fail("unknown subsystem", "grouping target '" + dir.subsystem + "' is not a subsystem");
    }
    const int k = static_cast<int>(sub->children.size());
    if (dir.blocks <= 0 || k % dir.blocks != 0) {
      fail("g does not divide k", std::to_string(dir.blocks) + " blocks cannot split " + std::to_string(k) + " elements of '" +
                                      dir.subsystem + "'");
    }
    for (const ElementSpec& c : sub->children) {
      if (!same_shape(c, sub->children.front())) {
        fail("non-identical children", "children of '" + dir.subsystem + "' differ in shape or ports");
      }
    }
    if (dir.blocks == k) continue;

    // Recover the series chain among the children.
    const std::string prefix = dir.subsystem + ".";
    auto child_of = [&](const PortRef& ref) -> int {
      if (ref.element.compare(0, prefix.size(), prefix) != 0) return -1;
      const std::string id = ref.element.substr(prefix.size());
      for (int c = 0; c < k; ++c) {
        if (sub->children[static_cast<std::size_t>(c)].id == id) return c;
      }
      return -1;
    };
    std::vector<int> next(static_cast<std::size_t>(k), -1);
    std::vector<int> prev(static_cast<std::size_t>(k), -1);
    std::string in_port;
    std::string out_port;
    std::vector<bool> is_link(out.connections.size(), false);
    for (std::size_t ci = 0; ci < out.connections.size(); ++ci) {
      const Connection& c = out.connections[ci];
      const int a = child_of(c.from);
      const int b = child_of(c.to);
      if (a < 0 || b < 0) continue;
      if (out_port.empty()) {
        out_port = c.from.port;
        in_port = c.to.port;
      }
      if (c.from.port != out_port || c.to.port != in_port || next[static_cast<std::size_t>(a)] >= 0 ||
          prev[static_cast<std::size_t>(b)] >= 0) {
        fail("not a series chain", "children of '" + dir.subsystem + "' are not linked as one series chain");
      }
      next[static_cast<std::size_t>(a)] = b;
      prev[static_cast<std::size_t>(b)] = a;
      is_link[ci] = true;
    }
    std::vector<int> chain;
    for (int c = 0; c < k; ++c) {
      if (prev[static_cast<std::size_t>(c)] < 0) {
        for (int at = c; at >= 0 && static_cast<int>(chain.size()) <= k; at = next[static_cast<std::size_t>(at)]) chain.push_back(at);
        break;
      }
    }
    if (static_cast<int>(chain.size()) != k || in_port == out_port) {
      fail("not a series chain", "children of '" + dir.subsystem + "' are not linked as one series chain");
    }

    const ElementSpec module = sub->children.front();
    const int per_block = k / dir.blocks;
    auto port_offset = [&](const std::string& id) {
      for (const PortSpec& p : module.ports) {
        if (p.id == id) return p;
      }
      return PortSpec{};
    };
    const PortSpec pin = port_offset(in_port);
    const PortSpec pout = port_offset(out_port);
    const double block_width = module.default_width * per_block;
    const double first_x = -0.5 * (per_block - 1) * module.default_width;
    const double last_x = -first_x;

    std::vector<ElementSpec> blocks;
    std::vector<int> block_of(static_cast<std::size_t>(k));
    std::vector<int> position(static_cast<std::size_t>(k));
    for (int b = 0; b < dir.blocks; ++b) {
      ElementSpec block;
      block.id = "block" + std::to_string(b + 1);
      block.kind = ElementKind::component;
      block.default_width = block_width;
      block.default_length = module.default_length;
      PortSpec bin = pin;
      bin.default_offset = Offset{first_x + pin.default_offset->a, pin.default_offset->b};
      PortSpec bout = pout;
      bout.default_offset = Offset{last_x + pout.default_offset->a, pout.default_offset->b};
      block.ports = {bin, bout};
      blocks.push_back(block);
      for (int t = 0; t < per_block; ++t) {
        const int c = chain[static_cast<std::size_t>(b * per_block + t)];
        block_of[static_cast<std::size_t>(c)] = b;
        position[static_cast<std::size_t>(c)] = t;
      }
    }
    for (const ElementSpec& b : blocks) {
      for (const PortSpec& p : b.ports) {
        if (p.domain == EnergyDomain::mechanical && !boundary_edge(b.default_width, b.default_length, *p.default_offset)) {
          fail("port not on boundary", "grouped port '" + b.id + "." + p.id + "' falls inside the block");
        }
      }
    }

    std::vector<Connection> kept;
    for (std::size_t ci = 0; ci < out.connections.size(); ++ci) {
      Connection c = out.connections[ci];
      const int a = child_of(c.from);
      const int b = child_of(c.to);
      if (is_link[ci] && block_of[static_cast<std::size_t>(a)] == block_of[static_cast<std::size_t>(b)]) continue;
      for (PortRef* ref : {&c.from, &c.to}) {
        const int m = child_of(*ref);
        if (m < 0) continue;
        const int blk = block_of[static_cast<std::size_t>(m)];
        const int pos = position[static_cast<std::size_t>(m)];
        const bool exposed = (ref->port == in_port && pos == 0) || (ref->port == out_port && pos == per_block - 1);
        if (!exposed) {
          fail("internal port connected", "port '" + ref->str() + "' is hidden inside a grouped block");
        }
        ref->element = prefix + blocks[static_cast<std::size_t>(blk)].id;
      }
      kept.push_back(c);
    }
    out.connections = std::move(kept);
    sub->children = std::move(blocks);
  }
  std::erase_if(out.grouping, [&](const GroupingDirective& g) {
    return std::find(directives.begin(), directives.end(), g) != directives.end();
  });
  return out;
}

}  // namespace ptlayout
