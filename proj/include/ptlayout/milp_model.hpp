#pragma once

#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ptlayout::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarType { continuous, binary };

enum class Sense { less_equal, greater_equal, equal };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  VarType type = VarType::continuous;
};

struct Term {
  int var = -1;
  double coef = 0.0;
};

/// One linear row `sum(coef * var) <sense> rhs`. The tag names the family
/// that emitted the row and is used in exports and violation reports.
struct Row {
  std::string tag;
  std::vector<Term> terms;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

/// Quadratic objective entry, `coef * x_i * x_j` in the objective as written
/// (no implicit 1/2 factor).
struct QuadTerm {
  int i = -1;
  int j = -1;
  double coef = 0.0;
};

/// A minimization MILP over continuous and binary variables. The quadratic
/// part is carried for export only; the built-in solvers reject it.
class MilpModel {
 public:
  int add_variable(std::string name, double lower, double upper,
                   VarType type = VarType::continuous);
  int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, VarType::binary); }
  int add_row(std::string tag, std::vector<Term> terms, Sense sense, double rhs);

  void set_objective(int var, double coef);
  void add_objective(int var, double coef);
  void add_quadratic(int i, int j, double coef) { quadratic_.push_back({i, j, coef}); }

  [[nodiscard]] int num_vars() const { return static_cast<int>(vars_.size()); }
  [[nodiscard]] int num_rows() const { return static_cast<int>(rows_.size()); }
  [[nodiscard]] const std::vector<Variable>& vars() const { return vars_; }
  [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }
  [[nodiscard]] const std::vector<double>& objective() const { return objective_; }
  [[nodiscard]] const std::vector<QuadTerm>& quadratic() const { return quadratic_; }
  [[nodiscard]] bool has_quadratic() const { return !quadratic_.empty(); }

  Variable& var(int j) { return vars_.at(static_cast<std::size_t>(j)); }
  [[nodiscard]] const Variable& var(int j) const { return vars_.at(static_cast<std::size_t>(j)); }
  [[nodiscard]] const Row& row(int i) const { return rows_.at(static_cast<std::size_t>(i)); }

  [[nodiscard]] std::optional<int> find_var(const std::string& name) const;
  [[nodiscard]] std::vector<int> binary_vars() const;
  [[nodiscard]] double objective_value(const std::vector<double>& x) const;
  [[nodiscard]] double row_activity(int i, const std::vector<double>& x) const;

  /// Rows whose tag starts with `prefix`.
  [[nodiscard]] int count_rows_with_prefix(const std::string& prefix) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<double> objective_;
  std::vector<QuadTerm> quadratic_;
  std::unordered_map<std::string, int> by_name_;
};

}  // namespace ptlayout::milp
