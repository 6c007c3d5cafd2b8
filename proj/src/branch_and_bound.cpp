#include "ptlayout/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace ptlayout::milp {

namespace {

constexpr double kIntegralityTol = 1e-6;

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  std::int64_t id = 0;
  double bound = -kInfinity;
  std::vector<BoundChange> changes;
  std::int64_t parent = -1;
  std::shared_ptr<const LpBasis> warm;  // parent's optimal basis
  // branching that created the node, for the pseudo-cost update
  int branched = -1;
  bool up = false;
  double parent_objective = 0.0;
  double distance = 0.0;
};

// Average objective gain per unit change of a binary, per direction.
class PseudoCosts {
 public:
  explicit PseudoCosts(int n) : sum_(2 * static_cast<std::size_t>(n), 0.0), count_(2 * static_cast<std::size_t>(n), 0) {}

  void update(int var, bool up, double gain_per_unit) {
    const std::size_t k = slot(var, up);
    sum_[k] += gain_per_unit;
    ++count_[k];
    total_[up] += gain_per_unit;
    ++seen_[up];
  }

  [[nodiscard]] double estimate(int var, bool up) const {
    const std::size_t k = slot(var, up);
    if (count_[k] > 0) return sum_[k] / count_[k];
    return seen_[up] > 0 ? total_[up] / seen_[up] : 1.0;
  }

 private:
  static std::size_t slot(int var, bool up) { return 2 * static_cast<std::size_t>(var) + (up ? 1 : 0); }
  std::vector<double> sum_;
  std::vector<int> count_;
  double total_[2] = {0.0, 0.0};
  int seen_[2] = {0, 0};
};

struct NodeOrder {
  // Lowest bound first; among equal bounds the newest node, which makes the
  // search dive after each branching.
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id < b.id;
  }
};

double absolute_gap(double gap, double incumbent) { return gap * std::max(1.0, std::abs(incumbent)); }

}  // namespace

std::string to_string(MipStatus status) {
  switch (status) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::node_limit: return "node-limit";
    case MipStatus::time_limit: return "time-limit";
    case MipStatus::numerical: return "numerical";
  }
  return "unknown";
}

double MipSolution::gap() const {
  if (!has_incumbent()) return kInfinity;
  return std::max(0.0, objective - bound) / std::max(1.0, std::abs(objective));
}

std::vector<Violation> verify_assignment(const MilpModel& model, const std::vector<double>& x, double tol) {
  std::vector<Violation> out;
  if (static_cast<int>(x.size()) != model.num_vars()) {
    out.push_back({"assignment-size", std::abs(static_cast<double>(x.size()) - model.num_vars())});
    return out;
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.var(j);
    const double xj = x[static_cast<std::size_t>(j)];
    if (!std::isfinite(xj)) {
      out.push_back({"bound:" + v.name, kInfinity});
      continue;
    }
    if (xj < v.lower - tol) out.push_back({"bound:" + v.name, v.lower - xj});
    if (xj > v.upper + tol) out.push_back({"bound:" + v.name, xj - v.upper});
    if (v.type == VarType::binary) {
      const double frac = std::abs(xj - std::round(xj));
      if (frac > tol) out.push_back({"integrality:" + v.name, frac});
    }
  }
  for (int i = 0; i < model.num_rows(); ++i) {
    const Row& row = model.row(i);
    const double act = model.row_activity(i, x);
    double excess = 0.0;
    if (row.sense != Sense::greater_equal) excess = std::max(excess, act - row.rhs);
    if (row.sense != Sense::less_equal) excess = std::max(excess, row.rhs - act);
    if (excess > tol) out.push_back({row.tag, excess});
  }
  return out;
}

MipSolution branch_and_bound(const MilpModel& model, const SolveOptions& options, const BinaryProposal& heuristic) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

  MipSolution result;
  const std::vector<int> binaries = model.binary_vars();
  LpEngine engine(model);
  LpEngine repair_engine(model);
  if (options.time_limit_seconds > 0.0) {
    const auto deadline = started + std::chrono::duration_cast<Clock::duration>(
                                        std::chrono::duration<double>(options.time_limit_seconds));
    engine.set_deadline(deadline);
    repair_engine.set_deadline(deadline);
  }
  auto out_of_time = [&] { return options.time_limit_seconds > 0.0 && elapsed() > options.time_limit_seconds; };

  // Fix every binary to its rounded value and re-solve; returns a verified
  // incumbent candidate or nothing.
  auto polish = [&](const std::vector<double>& proposal) -> std::optional<LpSolution> {
    repair_engine.reset_bounds();
    for (int v : binaries) {
      const double fixed = std::round(proposal[static_cast<std::size_t>(v)]);
      if (fixed < model.var(v).lower || fixed > model.var(v).upper) return std::nullopt;
      repair_engine.set_bounds(v, fixed, fixed);
    }
    LpSolution sol = repair_engine.solve();
    result.lp_iterations += sol.iterations;
    if (sol.status != LpStatus::optimal) return std::nullopt;
    for (int v : binaries) sol.x[static_cast<std::size_t>(v)] = std::round(sol.x[static_cast<std::size_t>(v)]);
    if (!verify_assignment(model, sol.x).empty()) return std::nullopt;
    sol.objective = model.objective_value(sol.x);
    return sol;
  };

  auto offer = [&](const LpSolution& sol) {
    if (sol.objective < result.objective) {
      result.objective = sol.objective;
      result.x = sol.x;
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  std::int64_t last_solved = -1;
  open.push(Node{next_id++, -kInfinity, {}, -1, nullptr});
  PseudoCosts pseudo(model.num_vars());
  bool hit_node_limit = false;
  bool hit_time_limit = false;
  bool numerical_trouble = false;

  while (!open.empty()) {
    if (result.has_incumbent() && open.top().bound >= result.objective - absolute_gap(options.gap, result.objective)) break;
    if (result.nodes >= options.node_limit) {
      hit_node_limit = true;
      break;
    }
    if (out_of_time()) {
      hit_time_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    ++result.nodes;

    // A child of the node solved last starts from the engine's live basis;
    // anything else starts from its parent's saved one.
    if (node.warm && node.parent != last_solved) engine.set_basis(*node.warm);
    last_solved = node.id;
    engine.reset_bounds();
    for (const BoundChange& c : node.changes) engine.set_bounds(c.var, c.lower, c.upper);
    const LpSolution sol = engine.solve();
    result.lp_iterations += sol.iterations;

    auto record = [&] {
      if (!options.record_bound_trace) return;
      double bound = result.has_incumbent() ? result.objective : kInfinity;
      if (!open.empty()) bound = std::min(bound, open.top().bound);
      bound = std::max(bound, node.bound);
      result.bound_trace.push_back(bound);
    };

    if (sol.status == LpStatus::iteration_limit && out_of_time()) {
      // The node is unfinished, put it back so the reported bound stays valid.
      open.push(std::move(node));
      hit_time_limit = true;
      break;
    }
    if (sol.status == LpStatus::numerical || sol.status == LpStatus::iteration_limit) {
      numerical_trouble = true;
      record();
      continue;
    }
    if (sol.status != LpStatus::optimal) {
      record();
      continue;
    }
    if (node.branched >= 0 && node.distance > 0.0) {
      pseudo.update(node.branched, node.up, std::max(0.0, sol.objective - node.parent_objective) / node.distance);
    }
    const double node_bound = std::max(node.bound, sol.objective);
    if (result.has_incumbent() && node_bound >= result.objective - absolute_gap(options.gap, result.objective)) {
      record();
      continue;
    }

    // Product of the estimated gains in both directions; ties by lowest index.
    int branch_var = -1;
    double best_score = -1.0;
    for (int v : binaries) {
      const double xv = sol.x[static_cast<std::size_t>(v)];
      if (std::abs(xv - std::round(xv)) <= kIntegralityTol) continue;
      const double down_gain = pseudo.estimate(v, false) * (xv - std::floor(xv));
      const double up_gain = pseudo.estimate(v, true) * (std::ceil(xv) - xv);
      const double score = std::max(down_gain, 1e-6) * std::max(up_gain, 1e-6);
      if (score > best_score * (1 + 1e-9) + 1e-12) {
        best_score = score;
        branch_var = v;
      }
    }

    if (branch_var < 0) {
      if (auto clean = polish(sol.x)) offer(*clean);
      record();
      continue;
    }

    const bool heuristic_turn = result.nodes <= 8 || result.nodes % 16 == 0;
    if (options.use_heuristic && heuristic && heuristic_turn) {
      if (auto proposal = heuristic(sol.x)) {
        if (auto clean = polish(*proposal)) offer(*clean);
      }
    }
    if (result.has_incumbent() && node_bound >= result.objective - absolute_gap(options.gap, result.objective)) {
      record();
      continue;
    }

    const double value = sol.x[static_cast<std::size_t>(branch_var)];
    auto warm = std::make_shared<const LpBasis>(engine.basis());
    Node down{0, node_bound, node.changes, node.id, warm, branch_var, false, sol.objective, value};
    down.changes.push_back({branch_var, model.var(branch_var).lower, 0.0});
    Node up{0, node_bound, std::move(node.changes), node.id, warm, branch_var, true, sol.objective, 1.0 - value};
    up.changes.push_back({branch_var, 1.0, model.var(branch_var).upper});
    // The child on the rounding side gets the larger id and is explored first.
    if (value >= 0.5) {
      down.id = next_id++;
      up.id = next_id++;
    } else {
      up.id = next_id++;
      down.id = next_id++;
    }
    open.push(std::move(down));
    open.push(std::move(up));
    record();
  }

  result.seconds = elapsed();
  if (open.empty() || (result.has_incumbent() &&
                       open.top().bound >= result.objective - absolute_gap(options.gap, result.objective))) {
    if (result.has_incumbent()) {
      result.bound = open.empty() ? result.objective : std::min(result.objective, open.top().bound);
      result.status = numerical_trouble ? MipStatus::numerical : MipStatus::optimal;
      if (result.status == MipStatus::numerical && result.gap() <= options.gap) result.status = MipStatus::optimal;
    } else {
      result.status = numerical_trouble ? MipStatus::numerical : MipStatus::infeasible;
    }
    return result;
  }
  result.bound = open.top().bound;
  if (result.has_incumbent()) result.bound = std::min(result.bound, result.objective);
  result.status = hit_time_limit ? MipStatus::time_limit : hit_node_limit ? MipStatus::node_limit : MipStatus::numerical;
  return result;
}

}  // namespace ptlayout::milp
