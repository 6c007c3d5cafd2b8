#include "ptlayout/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptlayout::milp {

int MilpModel::add_variable(std::string name, double lower, double upper, VarType type) {
  if (by_name_.count(name) != 0) {
    throw std::invalid_argument("duplicate variable name: " + name);
  }
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw std::invalid_argument("invalid bounds for variable " + name);
  }
  if (type == VarType::binary && (lower < 0.0 || upper > 1.0)) {
    throw std::invalid_argument("binary variable outside [0,1]: " + name);
  }
  const int id = num_vars();
  by_name_.emplace(name, id);
  vars_.push_back({std::move(name), lower, upper, type});
  objective_.push_back(0.0);
  return id;
}

int MilpModel::add_row(std::string tag, std::vector<Term> terms, Sense sense, double rhs) {
  // Merge repeated variables so every row has one entry per column.
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= num_vars()) {
      throw std::out_of_range("row " + tag + " references unknown variable");
    }
    if (!std::isfinite(t.coef)) {
      throw std::invalid_argument("non-finite coefficient in row " + tag);
    }
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  if (!std::isfinite(rhs)) {
    throw std::invalid_argument("non-finite right-hand side in row " + tag);
  }
  rows_.push_back({std::move(tag), std::move(merged), sense, rhs});
  return num_rows() - 1;
}

void MilpModel::set_objective(int var, double coef) { objective_.at(static_cast<std::size_t>(var)) = coef; }

void MilpModel::add_objective(int var, double coef) { objective_.at(static_cast<std::size_t>(var)) += coef; }

std::optional<int> MilpModel::find_var(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> MilpModel::binary_vars() const {
  std::vector<int> out;
  for (int j = 0; j < num_vars(); ++j) {
    if (vars_[static_cast<std::size_t>(j)].type == VarType::binary) out.push_back(j);
  }
  return out;
}

double MilpModel::objective_value(const std::vector<double>& x) const {
  double value = 0.0;
  for (int j = 0; j < num_vars(); ++j) value += objective_[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
  for (const QuadTerm& q : quadratic_) value += q.coef * x[static_cast<std::size_t>(q.i)] * x[static_cast<std::size_t>(q.j)];
  return value;
}

double MilpModel::row_activity(int i, const std::vector<double>& x) const {
  double activity = 0.0;
  for (const Term& t : row(i).terms) activity += t.coef * x[static_cast<std::size_t>(t.var)];
  return activity;
}

int MilpModel::count_rows_with_prefix(const std::string& prefix) const {
  return static_cast<int>(std::count_if(rows_.begin(), rows_.end(), [&](const Row& r) {
    return r.tag.compare(0, prefix.size(), prefix) == 0;
  }));
}

}  // namespace ptlayout::milp
