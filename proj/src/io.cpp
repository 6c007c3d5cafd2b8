#include "ptlayout/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ptlayout/oracle.hpp"

namespace ptlayout::io {

using json = nlohmann::ordered_json;

std::string exact(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// .system
// ---------------------------------------------------------------------------

namespace {

class SchemaReader {
 public:
  SystemDescription read(const json& doc) {
    SystemDescription d;
    if (!doc.is_object()) {
      schema("", "document must be an object");
      finish();
    }
    allow_keys(doc, "", {"design_space", "elements", "connections", "grouping", "comment"});
    if (auto* ds = member(doc, "", "design_space", true)) {
      allow_keys(*ds, "/design_space", {"width", "length", "units"});
      d.design_space.width = length(*ds, "/design_space", "width");
      d.design_space.length = length(*ds, "/design_space", "length");
    }
    if (auto* els = member(doc, "", "elements", true)) {
      if (!els->is_array()) schema("/elements", "must be an array");
      else
        for (std::size_t k = 0; k < els->size(); ++k) d.elements.push_back(element((*els)[k], "/elements/" + std::to_string(k)));
    }
    if (auto* cs = member(doc, "", "connections", false)) {
      if (!cs->is_array()) schema("/connections", "must be an array");
      else
        for (std::size_t k = 0; k < cs->size(); ++k) d.connections.push_back(connection((*cs)[k], "/connections/" + std::to_string(k)));
    }
    if (auto* gs = member(doc, "", "grouping", false)) {
      if (!gs->is_array()) schema("/grouping", "must be an array");
      else
        for (std::size_t k = 0; k < gs->size(); ++k) {
          const std::string at = "/grouping/" + std::to_string(k);
          const json& g = (*gs)[k];
          allow_keys(g, at, {"subsystem", "blocks"});
          GroupingDirective dir;
          dir.subsystem = text(g, at, "subsystem");
          if (auto* b = member(g, at, "blocks", true)) {
            if (!b->is_number_integer()) schema(at + "/blocks", "must be an integer");
            else dir.blocks = b->get<int>();
          }
          d.grouping.push_back(dir);
        }
    }
    finish();
    return d;
  }

 private:
  void schema(const std::string& at, const std::string& msg) { issues_.push_back({"schema violation", field(at) + msg}); }
  static std::string field(const std::string& at) { return "field '" + (at.empty() ? std::string("/") : at) + "': "; }

  void finish() {
    if (!issues_.empty()) throw ValidationError(issues_);
  }

  void allow_keys(const json& obj, const std::string& at, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) {
      schema(at, "must be an object");
      return;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) schema(at + "/" + it.key(), "unknown key");
    }
  }

  const json* member(const json& obj, const std::string& at, const char* key, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) schema(at + "/" + key, "missing");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& obj, const std::string& at, const char* key) {
    const json* v = member(obj, at, key, true);
    if (!v) return 0.0;
    if (!v->is_number()) {
      schema(at + "/" + key, "must be a number");
      return 0.0;
    }
    return v->get<double>();
  }

  double length(const json& obj, const std::string& at, const char* key) {
    const double v = number(obj, at, key);
    if (v < 0.0) issues_.push_back({"negative dimensions", field(at + "/" + key) + "must not be negative"});
    return v;
  }

  std::string text(const json& obj, const std::string& at, const char* key) {
    const json* v = member(obj, at, key, true);
    if (!v) return {};
    if (!v->is_string()) {
      schema(at + "/" + key, "must be a string");
      return {};
    }
    return v->get<std::string>();
  }

  std::optional<bool> flag(const json& obj, const std::string& at, const char* key) {
    const json* v = member(obj, at, key, false);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      schema(at + "/" + key, "must be true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  PortSpec port(const json& j, const std::string& at) {
    PortSpec p;
    allow_keys(j, at, {"id", "domain", "connection", "offset"});
    p.id = text(j, at, "id");
    const std::string domain = text(j, at, "domain");
    if (domain == "mechanical") p.domain = EnergyDomain::mechanical;
    else if (domain == "electrical") p.domain = EnergyDomain::electrical;
    else if (!domain.empty()) issues_.push_back({"unknown energy domain", field(at + "/domain") + "'" + domain + "'"});
    if (const json* c = member(j, at, "connection", false)) {
      if (*c == "direct") p.connection_kind = ConnectionKind::direct;
      else if (*c == "indirect") p.connection_kind = ConnectionKind::indirect;
      else schema(at + "/connection", "must be \"direct\" or \"indirect\"");
    }
    if (const json* o = member(j, at, "offset", false)) {
      if (!o->is_array() || o->size() != 2 || !(*o)[0].is_number() || !(*o)[1].is_number()) {
        schema(at + "/offset", "must be [a, b]");
      } else {
        p.default_offset = Offset{(*o)[0].get<double>(), (*o)[1].get<double>()};
      }
    }
    return p;
  }

  ElementSpec element(const json& j, const std::string& at) {
    ElementSpec e;
    allow_keys(j, at, {"id", "kind", "width", "length", "ports", "children", "fixed_pose"});
    e.id = text(j, at, "id");
    const std::string kind = text(j, at, "kind");
    if (kind == "component") {
      e.kind = ElementKind::component;
      e.default_width = length(j, at, "width");
      e.default_length = length(j, at, "length");
    } else if (kind == "subsystem") {
      e.kind = ElementKind::subsystem;
      if (member(j, at, "width", false) || member(j, at, "length", false)) {
        schema(at, "subsystem dimensions are decision variables and cannot be given");
      }
    } else if (!kind.empty()) {
      schema(at + "/kind", "must be \"component\" or \"subsystem\"");
    }
    if (const json* ps = member(j, at, "ports", false)) {
      if (!ps->is_array()) schema(at + "/ports", "must be an array");
      else
        for (std::size_t k = 0; k < ps->size(); ++k) e.ports.push_back(port((*ps)[k], at + "/ports/" + std::to_string(k)));
    }
    if (const json* cs = member(j, at, "children", false)) {
      if (!cs->is_array()) schema(at + "/children", "must be an array");
      else
        for (std::size_t k = 0; k < cs->size(); ++k) e.children.push_back(element((*cs)[k], at + "/children/" + std::to_string(k)));
    }
    if (const json* fp = member(j, at, "fixed_pose", false)) {
      const std::string fat = at + "/fixed_pose";
      allow_keys(*fp, fat, {"x", "y", "m", "n", "r"});
      FixedPose pose;
      if (member(*fp, fat, "x", false)) pose.x = number(*fp, fat, "x");
      if (member(*fp, fat, "y", false)) pose.y = number(*fp, fat, "y");
      pose.m = flag(*fp, fat, "m");
      pose.n = flag(*fp, fat, "n");
      pose.r = flag(*fp, fat, "r");
      e.fixed_pose = pose;
    }
    return e;
  }

  PortRef ref(const json& j, const std::string& at, const char* key) {
    const std::string s = text(j, at, key);
    const auto dot = s.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == s.size()) {
      if (!s.empty()) schema(at + "/" + key, "expected \"element.port\", got '" + s + "'");
      return {};
    }
    return {s.substr(0, dot), s.substr(dot + 1)};
  }

  Connection connection(const json& j, const std::string& at) {
    allow_keys(j, at, {"from", "to"});
    return {ref(j, at, "from"), ref(j, at, "to")};
  }

  std::vector<Issue> issues_;
};

json port_json(const PortSpec& p) {
  json j;
  j["id"] = p.id;
  j["domain"] = to_string(p.domain);
  j["connection"] = to_string(p.connection_kind);
  if (p.default_offset) j["offset"] = json::array({p.default_offset->a, p.default_offset->b});
  return j;
}

json element_json(const ElementSpec& e) {
  json j;
  j["id"] = e.id;
  j["kind"] = to_string(e.kind);
  if (e.kind == ElementKind::component) {
    j["width"] = e.default_width;
    j["length"] = e.default_length;
  }
  j["ports"] = json::array();
  for (const PortSpec& p : e.ports) j["ports"].push_back(port_json(p));
  if (e.kind == ElementKind::subsystem) {
    j["children"] = json::array();
    for (const ElementSpec& c : e.children) j["children"].push_back(element_json(c));
  }
  if (e.fixed_pose) {
    json fp = json::object();
    if (e.fixed_pose->x) fp["x"] = *e.fixed_pose->x;
    if (e.fixed_pose->y) fp["y"] = *e.fixed_pose->y;
    if (e.fixed_pose->m) fp["m"] = *e.fixed_pose->m;
    if (e.fixed_pose->n) fp["n"] = *e.fixed_pose->n;
    if (e.fixed_pose->r) fp["r"] = *e.fixed_pose->r;
    j["fixed_pose"] = fp;
  }
  return j;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Turn the byte offset into a line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ValidationError({{"syntax error", "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what}});
  }
}

}  // namespace

SystemDescription parse_system(const std::string& text) { return SchemaReader{}.read(parse_json(text)); }

SystemDescription read_system_file(const std::string& path) { return parse_system(read_file(path)); }

std::string serialize_system(const SystemDescription& d) {
  json doc;
  doc["design_space"] = {{"width", d.design_space.width}, {"length", d.design_space.length}};
  doc["elements"] = json::array();
  for (const ElementSpec& e : d.elements) doc["elements"].push_back(element_json(e));
  doc["connections"] = json::array();
  for (const Connection& c : d.connections) doc["connections"].push_back({{"from", c.from.str()}, {"to", c.to.str()}});
  if (!d.grouping.empty()) {
    doc["grouping"] = json::array();
    for (const GroupingDirective& g : d.grouping) doc["grouping"].push_back({{"subsystem", g.subsystem}, {"blocks", g.blocks}});
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// MPS
// ---------------------------------------------------------------------------

namespace {

std::string num9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

}  // namespace

void write_mps(std::ostream& out, const milp::MilpModel& model, const std::string& name) {
  using milp::Sense;
  std::set<std::string> seen;
  for (const milp::Row& r : model.rows()) {
    if (!seen.insert(r.tag).second) throw std::invalid_argument("duplicate row name '" + r.tag + "'");
  }
  out << "NAME " << name << "\n";
  out << "OBJSENSE\n    MIN\n";
  out << "ROWS\n N  obj\n";
  for (const milp::Row& r : model.rows()) {
    const char* s = r.sense == Sense::less_equal ? "L" : r.sense == Sense::greater_equal ? "G" : "E";
    out << " " << s << "  " << r.tag << "\n";
  }
  // Column-wise view of the matrix.
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(model.num_vars()));
  for (int i = 0; i < model.num_rows(); ++i) {
    for (const milp::Term& t : model.row(i).terms) cols[static_cast<std::size_t>(t.var)].push_back({i, t.coef});
  }
  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < model.num_vars(); ++j) {
    const milp::Variable& v = model.var(j);
    const bool is_int = v.type == milp::VarType::binary;
    if (is_int != in_int) {
      out << "    M" << marker++ << "  'MARKER'  " << (is_int ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = is_int;
    }
    const double c = model.objective()[static_cast<std::size_t>(j)];
    bool any = false;
    if (c != 0.0) {
      out << "    " << v.name << "  obj  " << num9(c) << "\n";
      any = true;
    }
    for (const auto& [row, coef] : cols[static_cast<std::size_t>(j)]) {
      out << "    " << v.name << "  " << model.row(row).tag << "  " << num9(coef) << "\n";
      any = true;
    }
    if (!any) out << "    " << v.name << "  obj  0\n";  // keep the column declared
  }
  if (in_int) out << "    M" << marker++ << "  'MARKER'  'INTEND'\n";
  out << "RHS\n";
  for (const milp::Row& r : model.rows()) {
    if (r.rhs != 0.0) out << "    RHS  " << r.tag << "  " << num9(r.rhs) << "\n";
  }
  out << "BOUNDS\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const milp::Variable& v = model.var(j);
    if (v.lower == v.upper) {
      out << " FX BND  " << v.name << "  " << num9(v.lower) << "\n";
    } else if (v.type == milp::VarType::binary && v.lower == 0.0 && v.upper == 1.0) {
      out << " BV BND  " << v.name << "\n";
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << " FR BND  " << v.name << "\n";
    } else {
      if (std::isinf(v.lower)) out << " MI BND  " << v.name << "\n";
      else out << " LO BND  " << v.name << "  " << num9(v.lower) << "\n";
      if (std::isinf(v.upper)) out << " PL BND  " << v.name << "\n";
      else out << " UP BND  " << v.name << "  " << num9(v.upper) << "\n";
    }
  }
  if (model.has_quadratic()) {
    // QUADOBJ holds the upper triangle of Q with objective 1/2 x'Qx.
    std::map<std::pair<int, int>, double> q;
    for (const milp::QuadTerm& t : model.quadratic()) {
      const int i = std::min(t.i, t.j);
      const int j = std::max(t.i, t.j);
      q[{i, j}] += i == j ? 2.0 * t.coef : t.coef;
    }
    out << "QUADOBJ\n";
    for (const auto& [ij, v] : q) {
      out << "    " << model.var(ij.first).name << "  " << model.var(ij.second).name << "  " << num9(v) << "\n";
    }
  }
  out << "ENDATA\n";
}

std::string to_mps(const milp::MilpModel& model, const std::string& name) {
  std::ostringstream ss;
  write_mps(ss, model, name);
  return ss.str();
}

milp::MilpModel read_mps(std::istream& in) {
  using milp::Sense;
  enum class Section { none, rows, columns, rhs, bounds, quadobj, objsense };
  Section section = Section::none;
  std::vector<std::pair<std::string, Sense>> rows;
  std::map<std::string, int> row_index;
  std::string obj_row;
  struct Col {
    std::string name;
    bool integer = false;
    double obj = 0.0;
    std::vector<std::pair<int, double>> entries;
    double lower = 0.0, upper = milp::kInfinity;
    bool binary = false;
  };
  std::vector<Col> cols;
  std::map<std::string, int> col_index;
  std::vector<double> rhs;
  std::vector<std::tuple<std::string, std::string, double>> quad;
  bool integer = false;

  auto fail = [](const std::string& msg) { throw std::invalid_argument("MPS: " + msg); };
  auto column = [&](const std::string& n) -> Col& {
    auto it = col_index.find(n);
    if (it != col_index.end()) return cols[static_cast<std::size_t>(it->second)];
    col_index[n] = static_cast<int>(cols.size());
    Col c;
    c.name = n;
    c.integer = integer;
    cols.push_back(std::move(c));
    return cols.back();
  };

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string w; ls >> w;) f.push_back(w);
    if (f.empty()) continue;
    if (line[0] != ' ') {
      const std::string& h = f[0];
      if (h == "NAME") section = Section::none;
      else if (h == "OBJSENSE") section = Section::objsense;
      else if (h == "ROWS") section = Section::rows;
      else if (h == "COLUMNS") section = Section::columns;
      else if (h == "RHS") section = Section::rhs;
      else if (h == "BOUNDS") section = Section::bounds;
      else if (h == "QUADOBJ") section = Section::quadobj;
      else if (h == "ENDATA") break;
      else fail("unknown section " + h);
      continue;
    }
    switch (section) {
      case Section::objsense:
        if (f[0] != "MIN") fail("only minimization is supported");
        break;
      case Section::rows: {
        if (f.size() != 2) fail("bad ROWS line: " + line);
        if (f[0] == "N") {
          obj_row = f[1];
          break;
        }
        const Sense s = f[0] == "L" ? Sense::less_equal : f[0] == "G" ? Sense::greater_equal : Sense::equal;
        row_index[f[1]] = static_cast<int>(rows.size());
        rows.push_back({f[1], s});
        break;
      }
      case Section::columns: {
        if (f.size() == 3 && f[1] == "'MARKER'") {
          integer = f[2] == "'INTORG'";
          break;
        }
        if (f.size() != 3 && f.size() != 5) fail("bad COLUMNS line: " + line);
        Col& c = column(f[0]);
        for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
          const double v = std::stod(f[k + 1]);
          if (f[k] == obj_row) {
            c.obj += v;
          } else {
            auto it = row_index.find(f[k]);
            if (it == row_index.end()) fail("unknown row " + f[k]);
            c.entries.push_back({it->second, v});
          }
        }
        break;
      }
      case Section::rhs: {
        if (rhs.empty()) rhs.assign(rows.size(), 0.0);
        for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
          auto it = row_index.find(f[k]);
          if (it == row_index.end()) fail("unknown row " + f[k]);
          rhs[static_cast<std::size_t>(it->second)] = std::stod(f[k + 1]);
        }
        break;
      }
      case Section::bounds: {
        if (f.size() < 3) fail("bad BOUNDS line: " + line);
        auto it = col_index.find(f[2]);
        if (it == col_index.end()) fail("unknown column " + f[2]);
        Col& c = cols[static_cast<std::size_t>(it->second)];
        const double v = f.size() > 3 ? std::stod(f[3]) : 0.0;
        if (f[0] == "UP") c.upper = v;
        else if (f[0] == "LO") c.lower = v;
        else if (f[0] == "FX") c.lower = c.upper = v;
        else if (f[0] == "FR") c.lower = -milp::kInfinity, c.upper = milp::kInfinity;
        else if (f[0] == "MI") c.lower = -milp::kInfinity;
        else if (f[0] == "PL") c.upper = milp::kInfinity;
        else if (f[0] == "BV") c.lower = 0.0, c.upper = 1.0, c.binary = true;
        else fail("unsupported bound type " + f[0]);
        break;
      }
      case Section::quadobj:
        if (f.size() != 3) fail("bad QUADOBJ line: " + line);
        quad.emplace_back(f[0], f[1], std::stod(f[2]));
        break;
      case Section::none: fail("data outside a section: " + line);
    }
  }
  if (rhs.empty()) rhs.assign(rows.size(), 0.0);

  milp::MilpModel model;
  std::vector<std::vector<milp::Term>> row_terms(rows.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const Col& c = cols[j];
    const bool bin = c.binary || c.integer;
    const int id = model.add_variable(c.name, bin ? std::max(c.lower, 0.0) : c.lower, bin ? std::min(c.upper, 1.0) : c.upper,
                                      bin ? milp::VarType::binary : milp::VarType::continuous);
    model.set_objective(id, c.obj);
    for (const auto& [r, v] : c.entries) row_terms[static_cast<std::size_t>(r)].push_back({id, v});
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    model.add_row(rows[i].first, row_terms[i], rows[i].second, rhs[i]);
  }
  for (const auto& [a, b, v] : quad) {
    const int i = col_index.at(a);
    const int j = col_index.at(b);
    model.add_quadratic(i, j, i == j ? v / 2.0 : v);
  }
  return model;
}

// ---------------------------------------------------------------------------
// .solution
// ---------------------------------------------------------------------------

std::string serialize_solution(const PlacementSolution& s, bool include_timing) {
  json doc;
  doc["design_space"] = {{"width", s.design_space.width}, {"length", s.design_space.length}};
  doc["objective_mode"] = to_string(s.mode);
  doc["objective"] = {{"j_con", s.j_con}, {"j_dim", s.j_dim}, {"total", s.j_con + s.j_dim}};
  json solver = {{"status", s.stats.status},       {"objective", s.stats.objective},
                 {"bound", s.stats.bound},         {"gap", s.stats.gap},
                 {"nodes", s.stats.nodes},         {"lp_iterations", s.stats.lp_iterations}};
  if (include_timing) solver["seconds"] = s.stats.seconds;
  doc["solver"] = solver;
  doc["elements"] = json::array();
  for (const ElementPlacement& e : s.elements) {
    json j = {{"path", e.path}, {"kind", to_string(e.kind)}, {"x", e.x}, {"y", e.y}, {"w", e.w}, {"l", e.l}};
    if (e.m) j["m"] = *e.m;
    if (e.n) j["n"] = *e.n;
    if (e.r) j["r"] = *e.r;
    doc["elements"].push_back(j);
  }
  doc["ports"] = json::array();
  for (const PortPlacement& p : s.ports) {
    doc["ports"].push_back({{"path", p.path}, {"a", p.a}, {"b", p.b}, {"x", p.x}, {"y", p.y}});
  }
  doc["connections"] = json::array();
  for (const ConnectionRoute& c : s.connections) {
    doc["connections"].push_back({{"from", c.from},
                                  {"to", c.to},
                                  {"domain", to_string(c.domain)},
                                  {"kind", c.direct ? "direct" : "indirect"},
                                  {"dx", c.dx},
                                  {"dy", c.dy},
                                  {"length_l1", c.length_l1},
                                  {"length_euclidean", c.length_euclidean}});
  }
  json vars = json::object();
  for (const auto& [name, value] : s.variables) vars[name] = value;
  doc["variables"] = vars;
  return doc.dump(2) + "\n";
}

PlacementSolution parse_solution(const std::string& text) {
  const json doc = parse_json(text);
  PlacementSolution s;
  try {
    s.design_space = {doc.at("design_space").at("width").get<double>(), doc.at("design_space").at("length").get<double>()};
    s.mode = doc.at("objective_mode") == "l1" ? ObjectiveMode::l1 : ObjectiveMode::squared_euclidean;
    s.j_con = doc.at("objective").at("j_con").get<double>();
    s.j_dim = doc.at("objective").at("j_dim").get<double>();
    const json& sv = doc.at("solver");
    s.stats.status = sv.at("status").get<std::string>();
    s.stats.objective = sv.at("objective").get<double>();
    s.stats.bound = sv.at("bound").get<double>();
    s.stats.gap = sv.at("gap").get<double>();
    s.stats.nodes = sv.at("nodes").get<std::int64_t>();
    s.stats.lp_iterations = sv.at("lp_iterations").get<std::int64_t>();
    s.stats.seconds = sv.value("seconds", 0.0);
    for (const json& e : doc.at("elements")) {
      ElementPlacement p;
      p.path = e.at("path").get<std::string>();
      p.kind = e.at("kind") == "component" ? ElementKind::component : ElementKind::subsystem;
      p.x = e.at("x").get<double>();
      p.y = e.at("y").get<double>();
      p.w = e.at("w").get<double>();
      p.l = e.at("l").get<double>();
      if (e.contains("m")) p.m = e.at("m").get<bool>();
      if (e.contains("n")) p.n = e.at("n").get<bool>();
      if (e.contains("r")) p.r = e.at("r").get<bool>();
      s.elements.push_back(p);
    }
    for (const json& p : doc.at("ports")) {
      s.ports.push_back({p.at("path").get<std::string>(), p.at("a").get<double>(), p.at("b").get<double>(),
                         p.at("x").get<double>(), p.at("y").get<double>()});
    }
    for (const json& c : doc.at("connections")) {
      ConnectionRoute r;
      r.from = c.at("from").get<std::string>();
      r.to = c.at("to").get<std::string>();
      r.domain = c.at("domain") == "mechanical" ? EnergyDomain::mechanical : EnergyDomain::electrical;
      r.direct = c.at("kind") == "direct";
      r.dx = c.at("dx").get<double>();
      r.dy = c.at("dy").get<double>();
      r.length_l1 = c.at("length_l1").get<double>();
      r.length_euclidean = c.at("length_euclidean").get<double>();
      s.connections.push_back(r);
    }
    for (auto it = doc.at("variables").begin(); it != doc.at("variables").end(); ++it) {
      s.variables.emplace_back(it.key(), it.value().get<double>());
    }
  } catch (const json::exception& e) {
    throw ValidationError({{"schema violation", std::string("solution document: ") + e.what()}});
  }
  return s;
}

std::vector<std::pair<std::string, double>> parse_variables(const std::string& text) {
  const json doc = parse_json(text);
  std::vector<std::pair<std::string, double>> out;
  const auto vars = doc.find("variables");
  if (!doc.is_object() || vars == doc.end() || !vars->is_object()) {
    throw ValidationError(std::vector<Issue>{{"schema violation", "field '/variables': missing or not an object"}});
  }
  for (auto it = vars->begin(); it != vars->end(); ++it) {
    if (!it.value().is_number()) {
      throw ValidationError(std::vector<Issue>{{"schema violation", "field '/variables/" + it.key() + "': must be a number"}});
    }
    out.emplace_back(it.key(), it.value().get<double>());
  }
  return out;
}

std::vector<double> assignment_from(const milp::MilpModel& model, const PlacementSolution& solution) {
  return assignment_from(model, solution.variables);
}

std::vector<double> assignment_from(const milp::MilpModel& model,
                                    const std::vector<std::pair<std::string, double>>& variables) {
  std::map<std::string, double> by_name(variables.begin(), variables.end());
  std::vector<double> x(static_cast<std::size_t>(model.num_vars()));
  for (int j = 0; j < model.num_vars(); ++j) {
    auto it = by_name.find(model.var(j).name);
    if (it == by_name.end()) throw std::invalid_argument("solution lacks variable '" + model.var(j).name + "'");
    x[static_cast<std::size_t>(j)] = it->second;
  }
  return x;
}

// ---------------------------------------------------------------------------
// .svg
// ---------------------------------------------------------------------------

std::string render_svg(const ValidatedSystem& system, const PlacementSolution& s) {
  const auto issues = oracle::audit_layout(system, s);
  if (!issues.empty()) {
    throw std::invalid_argument("refusing to render an infeasible layout: " + issues.front().kind + " at " +
                                issues.front().subject);
  }
  const double W = s.design_space.width;
  const double L = s.design_space.length;
  const double stroke = std::max(W, L) / 400.0;
  const double font = std::max(W, L) / 80.0;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << exact(-W / 2) << " " << exact(-L / 2) << " " << exact(W)
    << " " << exact(L) << "\" width=\"" << exact(W) << "\" height=\"" << exact(L) << "\">\n";
  // Flip y so the forward direction points up; coordinates below are the
  // solution's own.
  o << "<g transform=\"scale(1,-1)\" stroke-width=\"" << exact(stroke) << "\">\n";
  o << "<rect class=\"design-space\" x=\"" << exact(-W / 2) << "\" y=\"" << exact(-L / 2) << "\" width=\"" << exact(W)
    << "\" height=\"" << exact(L) << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (const ElementPlacement& e : s.elements) {
    const bool sub = e.kind == ElementKind::subsystem;
    o << "<rect class=\"" << (sub ? "subsystem" : "component") << "\" data-path=\"" << e.path << "\" x=\""
      << exact(e.x - e.w / 2) << "\" y=\"" << exact(e.y - e.l / 2) << "\" width=\"" << exact(e.w) << "\" height=\""
      << exact(e.l) << "\"";
    if (sub) o << " fill=\"none\" stroke=\"#333\" stroke-dasharray=\"" << exact(4 * stroke) << "," << exact(3 * stroke) << "\"";
    else o << " fill=\"#dde4ee\" stroke=\"#333\"";
    o << "/>\n";
  }
  for (const ConnectionRoute& c : s.connections) {
    auto find = [&](const std::string& path) -> const PortPlacement& {
      for (const PortPlacement& p : s.ports)
        if (p.path == path) return p;
      throw std::invalid_argument("unknown port '" + path + "'");
    };
    const PortPlacement& a = find(c.from);
    const PortPlacement& b = find(c.to);
    if (c.domain == EnergyDomain::mechanical) {
      o << "<line class=\"shaft\" x1=\"" << exact(a.x) << "\" y1=\"" << exact(a.y) << "\" x2=\"" << exact(b.x) << "\" y2=\""
        << exact(b.y) << "\" stroke=\"black\" stroke-width=\"" << exact(3 * stroke) << "\"/>\n";
    } else {
      o << "<polyline class=\"electrical\" points=\"" << exact(a.x) << "," << exact(a.y) << " " << exact(b.x) << ","
        << exact(a.y) << " " << exact(b.x) << "," << exact(b.y) << "\" fill=\"none\" stroke=\"orange\"/>\n";
    }
  }
  o << "</g>\n";
  for (const ElementPlacement& e : s.elements) {
    if (e.kind == ElementKind::subsystem) continue;
    o << "<text x=\"" << exact(e.x) << "\" y=\"" << exact(-e.y) << "\" font-size=\"" << exact(font)
      << "\" text-anchor=\"middle\" dominant-baseline=\"middle\">" << e.path.substr(e.path.rfind('.') + 1) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace ptlayout::io
