#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptlayout/io.hpp"
#include "ptlayout/oracle.hpp"
#include "ptlayout/placement.hpp"

using namespace ptlayout;
using json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, usage = 1, invalid = 2, infeasible = 3, limit = 4, violated = 5 };

int report(const std::string& code, const std::string& message, int exit_code) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
  return exit_code;
}

struct Config {
  std::string input;
  std::string solution;
  std::string objective = "l1";
  std::vector<std::string> groups;
  double gap = 1e-4;
  double time_limit = 0.0;
  std::int64_t node_limit = 1'000'000;
  bool deterministic = true;
  int threads = 1;
  std::string out = ".";
  bool timing = false;
};

ObjectiveMode objective_mode(const std::string& s) {
  return s == "l1" ? ObjectiveMode::l1 : ObjectiveMode::squared_euclidean;
}

FormulationOptions formulation_options(const std::string& objective) {
  FormulationOptions f;
  f.objective = objective_mode(objective);
  return f;
}

std::vector<GroupingDirective> parse_groups(const std::vector<std::string>& groups) {
  std::vector<GroupingDirective> out;
  for (const std::string& g : groups) {
    const auto colon = g.rfind(':');
    int blocks = 0;
    if (colon != std::string::npos) {
      try {
        blocks = std::stoi(g.substr(colon + 1));
      } catch (const std::exception&) {
        blocks = 0;
      }
    }
    if (colon == std::string::npos || colon == 0 || blocks < 1) {
      throw CLI::ValidationError("--group", "expected <subsystem>:<blocks>, got '" + g + "'");
    }
    out.push_back({g.substr(0, colon), blocks});
  }
  return out;
}

// Reads, groups and validates; directives in the file come first, flags may
// add more.
ValidatedSystem load(const Config& cfg) {
  SystemDescription d = io::read_system_file(cfg.input);
  std::vector<GroupingDirective> directives = d.grouping;
  for (const GroupingDirective& g : parse_groups(cfg.groups)) directives.push_back(g);
  if (!directives.empty()) d = group_elements(d, directives);
  return validate(d);
}

std::string output_path(const Config& cfg, const std::string& ext) {
  std::filesystem::create_directories(cfg.out);
  return (std::filesystem::path(cfg.out) / std::filesystem::path(cfg.input).stem()).string() + ext;
}

json model_summary(const Formulation& f) {
  int binaries = 0;
  for (int j = 0; j < f.model.num_vars(); ++j) binaries += f.model.var(j).type == milp::VarType::binary;
  return {{"variables", f.model.num_vars()}, {"binaries", binaries}, {"rows", f.model.num_rows()}, {"big_m", f.big_m}};
}

int cmd_validate(const Config& cfg) {
  const ValidatedSystem sys = load(cfg);
  json levels = json::array();
  for (int l = 0; l <= sys.n_levels; ++l) levels.push_back(sys.elements_at_level(l).size());
  int components = 0;
  for (const auto& e : sys.elements) components += e.kind == ElementKind::component;
  std::cout << json{{"status", "valid"},
                    {"elements", sys.elements.size()},
                    {"components", components},
                    {"subsystems", sys.subsystems().size()},
                    {"n_levels", sys.n_levels},
                    {"elements_per_level", levels},
                    {"ports", sys.ports.size()},
                    {"connections", sys.connections.size()},
                    {"interference_pairs", sys.pairs.size()}}
                   .dump()
            << "\n";
  return ok;
}

int cmd_build(const Config& cfg) {
  const ValidatedSystem sys = load(cfg);
  const Formulation f = build_formulation(sys, formulation_options(cfg.objective));
  const std::string path = output_path(cfg, ".mps");
  io::write_file(path, io::to_mps(f.model, std::filesystem::path(cfg.input).stem().string()));
  json summary = model_summary(f);
  summary["mps"] = path;
  summary["objective_mode"] = to_string(f.mode);
  std::cout << summary.dump() << "\n";
  return ok;
}

int cmd_solve(const Config& cfg) {
  const ValidatedSystem sys = load(cfg);
  milp::SolveOptions opt;
  opt.gap = cfg.gap;
  opt.node_limit = cfg.node_limit;
  opt.time_limit_seconds = cfg.time_limit;
  opt.deterministic = cfg.deterministic;
  const PlacementRun run = solve_placement(sys, formulation_options(cfg.objective), opt);
  json summary = model_summary(run.formulation);
  summary["status"] = milp::to_string(run.mip.status);
  summary["nodes"] = run.mip.nodes;
  summary["lp_iterations"] = run.mip.lp_iterations;
  summary["seconds"] = run.mip.seconds;
  if (!run.solution) {
    std::cout << summary.dump() << "\n";
    if (run.mip.status == milp::MipStatus::infeasible) return report("infeasible", "no feasible placement exists", infeasible);
    return report("no incumbent", "stopped at " + milp::to_string(run.mip.status) + " without a feasible placement",
                  infeasible);
  }
  const PlacementSolution& s = *run.solution;
  summary["objective"] = s.stats.objective;
  summary["bound"] = s.stats.bound;
  summary["gap"] = s.stats.gap;
  summary["j_con"] = s.j_con;
  summary["j_dim"] = s.j_dim;
  const std::string sol_path = output_path(cfg, ".solution");
  io::write_file(sol_path, io::serialize_solution(s, cfg.timing));
  summary["solution"] = sol_path;
  const auto audit = oracle::audit_layout(sys, s);
  if (!run.violations.empty() || !audit.empty()) {
    std::cout << summary.dump() << "\n";
    const std::string what = !run.violations.empty() ? run.violations.front().tag : audit.front().kind + " " + audit.front().subject;
    return report("verification failed", "incumbent violates " + what, violated);
  }
  const std::string svg_path = output_path(cfg, ".svg");
  io::write_file(svg_path, io::render_svg(sys, s));
  summary["svg"] = svg_path;
  std::cout << summary.dump() << "\n";
  return run.mip.status == milp::MipStatus::optimal ? ok : limit;
}

int cmd_verify(const Config& cfg) {
  const ValidatedSystem sys = load(cfg);
  const std::string text = io::read_file(cfg.solution);
  // A full solution document carries its objective mode; a bare variable
  // table (external solver output) uses --objective.
  std::optional<PlacementSolution> doc;
  try {
    doc = io::parse_solution(text);
  } catch (const ValidationError&) {
  }
  const ObjectiveMode mode = doc ? doc->mode : objective_mode(cfg.objective);
  const Formulation f = build_formulation(sys, FormulationOptions{mode, std::nullopt});
  std::vector<double> x;
  try {
    x = io::assignment_from(f.model, doc ? doc->variables : io::parse_variables(text));
  } catch (const std::invalid_argument& e) {
    return report("verification failed", e.what(), violated);
  }
  const auto violations = milp::verify_assignment(f.model, x);
  std::map<std::string, std::pair<int, double>> families;  // violations, max residual
  for (const auto& r : f.model.rows()) families.try_emplace(row_family(r.tag), 0, 0.0);
  json list = json::array();
  for (const auto& v : violations) {
    auto& fam = families[v.tag.rfind("bound:", 0) == 0 || v.tag.rfind("integrality:", 0) == 0 ? v.tag.substr(0, v.tag.find(':'))
                                                                                               : row_family(v.tag)];
    ++fam.first;
    fam.second = std::max(fam.second, v.residual);
    list.push_back({{"tag", v.tag}, {"residual", v.residual}});
  }
  json fam_json = json::object();
  for (const auto& [name, stat] : families) fam_json[name] = {{"violations", stat.first}, {"max_residual", stat.second}};
  const PlacementSolution decoded = decode_solution(sys, f, x);
  const auto audit = oracle::audit_layout(sys, decoded);
  json audit_json = json::array();
  for (const auto& a : audit) audit_json.push_back({{"kind", a.kind}, {"subject", a.subject}, {"residual", a.residual}});
  const bool good = violations.empty() && audit.empty();
  std::cout << json{{"status", good ? "verified" : "violated"},
                    {"objective", f.model.objective_value(x)},
                    {"families", fam_json},
                    {"violations", list},
                    {"audit", audit_json}}
                   .dump()
            << "\n";
  if (!good) return report("verification failed", std::to_string(violations.size()) + " row violations, " +
                                                      std::to_string(audit.size()) + " geometric issues",
                           violated);
  return ok;
}

int cmd_oracle(const Config& cfg) {
  const ValidatedSystem sys = load(cfg);
  const Formulation f = build_formulation(sys, formulation_options(cfg.objective));
  if (f.mode != ObjectiveMode::l1) return report("usage", "the oracle enumerates the linear objective only", usage);
  oracle::Enumeration e;
  try {
    e = oracle::enumerate_optimal(f.model);
  } catch (const std::invalid_argument& err) {
    return report("too large", err.what(), usage);
  }
  milp::SolveOptions opt;
  opt.gap = 1e-9;
  const PlacementRun run = solve_placement(sys, {}, opt);
  json out = {{"free_binaries", e.binaries.size()}, {"feasible_assignments", e.feasible.size()}};
  if (!e.best.has_incumbent()) {
    out["status"] = run.mip.has_incumbent() ? "mismatch" : "infeasible";
    std::cout << out.dump() << "\n";
    return run.mip.has_incumbent() ? report("mismatch", "solver found a point the enumeration did not", violated)
                                   : report("infeasible", "no assignment is feasible", infeasible);
  }
  const double tol = 1e-6 * std::max(1.0, std::abs(e.best.objective));
  const bool agree = run.mip.has_incumbent() && std::abs(run.mip.objective - e.best.objective) <= tol;
  out["status"] = agree ? "agree" : "mismatch";
  out["enumeration_objective"] = e.best.objective;
  out["solver_objective"] = run.mip.has_incumbent() ? json(run.mip.objective) : json(nullptr);
  out["optimal_assignments"] = oracle::optimal_assignments(e).size();
  std::cout << out.dump() << "\n";
  return agree ? ok : report("mismatch", "branch-and-bound and enumeration disagree", violated);
}

std::string show(const OrientationRequirement& r) {
  auto one = [](const char* name, const std::optional<bool>& v) {
    return std::string(name) + "=" + (v ? (*v ? "1" : "0") : "-");
  };
  return one("m", r.m) + " " + one("n", r.n) + " " + one("r", r.r);
}

int cmd_tables() {
  const Edge edges[] = {Edge::top, Edge::bottom, Edge::right, Edge::left};
  for (Perspective persp : {Perspective::ego, Perspective::connecting}) {
    const oracle::TruthTables t = oracle::regenerate_truth_tables(persp);
    std::cout << to_string(persp) << " perspective\n";
    std::cout << "  edge     (0,0)        (0,1)        (1,0)        (1,1)        m        n        r\n";
    for (std::size_t e = 0; e < 4; ++e) {
      std::string line = "  " + to_string(edges[e]);
      line.resize(9, ' ');
      for (int k = 0; k < 4; ++k) {
        std::string cell = show(t.table[e][static_cast<std::size_t>(k)]);
        cell.resize(13, ' ');
        line += cell;
      }
      for (Logic l : {t.logic[e].m, t.logic[e].n, t.logic[e].r}) {
        std::string cell = to_string(l);
        cell.resize(9, ' ');
        line += cell;
      }
      std::cout << line << "\n";
    }
  }
  const auto diffs = oracle::compare_with_printed(oracle::regenerate_truth_tables());
  std::cout << "differences from the reference table: " << diffs.size() << "\n";
  for (const auto& d : diffs) {
    std::cout << "  " << to_string(d.edge) << " (" << d.p << "," << d.q << "): reference " << show(d.printed)
              << ", derived " << show(d.derived) << "\n";
  }
  const auto rows = oracle::compare_with_printed_rows(oracle::regenerate_truth_tables());
  std::cout << "differences from the reference row logic: " << rows.size() << "\n";
  for (const auto& d : rows) {
    std::cout << "  " << to_string(d.edge) << ": reference m=" << to_string(d.printed.m) << ", derived m="
              << to_string(d.derived.m) << "\n";
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical powertrain component placement"};
  app.require_subcommand(1, 1);
  Config cfg;

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("system", cfg.input, "System description (.system)")->required()->check(CLI::ExistingFile);
    sub->add_option("--group", cfg.groups, "Group a series chain: <subsystem>:<blocks>");
  };
  auto add_objective = [&](CLI::App* sub) {
    sub->add_option("--objective", cfg.objective, "Connection-length objective")
        ->check(CLI::IsMember({"l1", "sq-l2-export"}));
  };

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a system description and report its hierarchy");
  add_input(validate_cmd);

  CLI::App* build_cmd = app.add_subcommand("build", "Write the placement model as MPS");
  add_input(build_cmd);
  add_objective(build_cmd);
  build_cmd->add_option("--out", cfg.out, "Output directory");

  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve and write .solution and .svg");
  add_input(solve_cmd);
  add_objective(solve_cmd);
  solve_cmd->add_option("--gap", cfg.gap, "Relative optimality gap")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--time-limit", cfg.time_limit, "Seconds, 0 for none")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--node-limit", cfg.node_limit, "Branch-and-bound nodes")->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--deterministic,!--no-deterministic", cfg.deterministic, "Reproducible node order (default on)");
  solve_cmd->add_option("--threads", cfg.threads, "Worker threads (the built-in solver uses one)")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--timing", cfg.timing, "Record solve time in the .solution file");
  solve_cmd->add_option("--out", cfg.out, "Output directory");

  CLI::App* verify_cmd = app.add_subcommand("verify", "Check a solution against the model");
  add_input(verify_cmd);
  verify_cmd->add_option("solution", cfg.solution, ".solution file or {\"variables\": {...}}")
      ->required()
      ->check(CLI::ExistingFile);
  add_objective(verify_cmd);

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Cross-check the solver by exhaustive enumeration");
  add_input(oracle_cmd);

  app.add_subcommand("tables", "Print the regenerated orientation truth tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), usage);
  }

  try {
    if (*validate_cmd) return cmd_validate(cfg);
    if (*build_cmd) return cmd_build(cfg);
    if (*solve_cmd) return cmd_solve(cfg);
    if (*verify_cmd) return cmd_verify(cfg);
    if (*oracle_cmd) return cmd_oracle(cfg);
    return cmd_tables();
  } catch (const CLI::ValidationError& e) {
    return report("usage", e.what(), usage);
  } catch (const ValidationError& e) {
    for (std::size_t k = 0; k + 1 < e.issues().size(); ++k) report(e.issues()[k].code, e.issues()[k].message, invalid);
    return report(e.issues().back().code, e.issues().back().message, invalid);
  } catch (const std::exception& e) {
    return report("error", e.what(), usage);
  }
}
