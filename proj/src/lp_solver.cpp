#include "ptlayout/lp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ptlayout::milp {

namespace {

constexpr double kDropTolerance = 1e-14;
constexpr std::int64_t kRefactorInterval = 400;

bool finite(double v) { return std::isfinite(v); }

// Dense LU with partial pivoting, returns the explicit inverse or false when
// the matrix is numerically singular.
bool invert_dense(std::vector<double>& a, int k) {
  std::vector<double> inv(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) inv[static_cast<std::size_t>(i) * k + i] = 1.0;
  auto at = [k](std::vector<double>& v, int r, int c) -> double& { return v[static_cast<std::size_t>(r) * k + c]; };
  for (int col = 0; col < k; ++col) {
    int best = col;
    double best_abs = std::abs(at(a, col, col));
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(at(a, r, col)) > best_abs) {
        best_abs = std::abs(at(a, r, col));
        best = r;
      }
    }
    if (best_abs < 1e-11) return false;
    if (best != col) {
      for (int c = 0; c < k; ++c) {
        std::swap(at(a, col, c), at(a, best, c));
        std::swap(at(inv, col, c), at(inv, best, c));
      }
    }
    const double piv = at(a, col, col);
    for (int c = 0; c < k; ++c) {
      at(a, col, c) /= piv;
      at(inv, col, c) /= piv;
    }
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = at(a, r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < k; ++c) {
        at(a, r, c) -= f * at(a, col, c);
        at(inv, r, c) -= f * at(inv, col, c);
      }
    }
  }
  a.swap(inv);
  return true;
}

}  // namespace

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration-limit";
    case LpStatus::numerical: return "numerical";
  }
  return "unknown";
}

LpEngine::LpEngine(const MilpModel& model, LpTolerances tol)
    : model_(&model), tol_(tol), n_(model.num_vars()), m_(model.num_rows()) {
  if (model.has_quadratic()) {
    throw std::invalid_argument("the LP engine does not support quadratic objectives");
  }
  cols_ = static_cast<std::size_t>(n_ + m_);
  col_entries_.assign(static_cast<std::size_t>(n_), {});
  row_entries_.assign(static_cast<std::size_t>(m_), {});
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : model.row(i).terms) {
      row_entries_[static_cast<std::size_t>(i)].push_back(t);
      col_entries_[static_cast<std::size_t>(t.var)].push_back({i, t.coef});
    }
  }

  cost_.assign(cols_, 0.0);
  base_lo_.assign(cols_, 0.0);
  base_hi_.assign(cols_, 0.0);
  for (int j = 0; j < n_; ++j) {
    const Variable& v = model.var(j);
    cost_[static_cast<std::size_t>(j)] = model.objective()[static_cast<std::size_t>(j)];
    base_lo_[static_cast<std::size_t>(j)] = v.lower;
    base_hi_[static_cast<std::size_t>(j)] = v.upper;
  }
  for (int i = 0; i < m_; ++i) {
    const Row& row = model.row(i);
    const auto k = static_cast<std::size_t>(n_ + i);
    switch (row.sense) {
      case Sense::less_equal: base_lo_[k] = -kInfinity; base_hi_[k] = row.rhs; break;
      case Sense::greater_equal: base_lo_[k] = row.rhs; base_hi_[k] = kInfinity; break;
      case Sense::equal: base_lo_[k] = row.rhs; base_hi_[k] = row.rhs; break;
    }
  }
  lo_ = base_lo_;
  hi_ = base_hi_;

  x_.assign(cols_, 0.0);
  d_.assign(cols_, 0.0);
  basis_.resize(static_cast<std::size_t>(m_));
  row_of_.assign(cols_, -1);
  state_.assign(cols_, NonbasicAt::lower);
  tableau_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
  for (int i = 0; i < m_; ++i) {
    basis_[static_cast<std::size_t>(i)] = n_ + i;
    row_of_[static_cast<std::size_t>(n_ + i)] = i;
    state_[static_cast<std::size_t>(n_ + i)] = NonbasicAt::basic;
    for (const Term& t : row_entries_[static_cast<std::size_t>(i)]) tab(i, t.var) = -t.coef;
    tab(i, n_ + i) = 1.0;
  }
}

void LpEngine::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= n_) throw std::out_of_range("set_bounds: variable index");
  lo_[static_cast<std::size_t>(var)] = lower;
  hi_[static_cast<std::size_t>(var)] = upper;
}

bool LpEngine::past_deadline() const {
  return deadline_ && (total_iterations_ & 15) == 0 && std::chrono::steady_clock::now() > *deadline_;
}

void LpEngine::reset_bounds() {
  lo_ = base_lo_;
  hi_ = base_hi_;
}

void LpEngine::place_nonbasic(int k, bool prefer_dual_feasible) {
  const auto ks = static_cast<std::size_t>(k);
  const double lo = lo_[ks];
  const double hi = hi_[ks];
  NonbasicAt at;
  if (finite(lo) && finite(hi)) {
    if (lo == hi) {
      at = NonbasicAt::lower;
    } else if (prefer_dual_feasible) {
      at = d_[ks] >= 0.0 ? NonbasicAt::lower : NonbasicAt::upper;
    } else {
      at = state_[ks] == NonbasicAt::upper ? NonbasicAt::upper : NonbasicAt::lower;
    }
  } else if (finite(lo)) {
    at = NonbasicAt::lower;
  } else if (finite(hi)) {
    at = NonbasicAt::upper;
  } else {
    at = NonbasicAt::zero;
  }
  state_[ks] = at;
  x_[ks] = at == NonbasicAt::lower ? lo : at == NonbasicAt::upper ? hi : 0.0;
}

void LpEngine::recompute_basic_values() {
  std::vector<std::pair<int, double>> active;
  for (int k = 0; k < n_ + m_; ++k) {
    if (state_[static_cast<std::size_t>(k)] != NonbasicAt::basic && x_[static_cast<std::size_t>(k)] != 0.0) {
      active.emplace_back(k, x_[static_cast<std::size_t>(k)]);
    }
  }
  for (int i = 0; i < m_; ++i) {
    const double* row = &tableau_[static_cast<std::size_t>(i) * cols_];
    double v = 0.0;
    for (const auto& [k, val] : active) v -= row[k] * val;
    x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = v;
  }
}

void LpEngine::recompute_reduced_costs(const std::vector<double>& cost) {
  d_ = cost;
  for (int i = 0; i < m_; ++i) {
    const double cb = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
    if (cb == 0.0) continue;
    const double* row = &tableau_[static_cast<std::size_t>(i) * cols_];
    for (std::size_t k = 0; k < cols_; ++k) d_[k] -= cb * row[k];
  }
  for (int i = 0; i < m_; ++i) d_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = 0.0;
}

bool LpEngine::dual_feasible() const {
  for (std::size_t k = 0; k < cols_; ++k) {
    if (lo_[k] == hi_[k]) continue;
    switch (state_[k]) {
      case NonbasicAt::basic: break;
      case NonbasicAt::lower: if (d_[k] < -tol_.dual) return false; break;
      case NonbasicAt::upper: if (d_[k] > tol_.dual) return false; break;
      case NonbasicAt::zero: if (std::abs(d_[k]) > tol_.dual) return false; break;
    }
  }
  return true;
}

void LpEngine::pivot(int r, int q) {
  double* prow = &tableau_[static_cast<std::size_t>(r) * cols_];
  const double piv = prow[q];
  std::vector<int> nz;
  nz.reserve(64);
  for (std::size_t k = 0; k < cols_; ++k) {
    if (prow[k] != 0.0) {
      prow[k] /= piv;
      if (std::abs(prow[k]) < kDropTolerance) {
        prow[k] = 0.0;
      } else {
        nz.push_back(static_cast<int>(k));
      }
    }
  }
  prow[q] = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = &tableau_[static_cast<std::size_t>(i) * cols_];
    const double f = row[q];
    if (f == 0.0) continue;
    for (int k : nz) row[k] -= f * prow[k];
    row[q] = 0.0;
  }
  const double dq = d_[static_cast<std::size_t>(q)];
  if (dq != 0.0) {
    for (int k : nz) d_[static_cast<std::size_t>(k)] -= dq * prow[k];
  }
  d_[static_cast<std::size_t>(q)] = 0.0;

  const int leaving = basis_[static_cast<std::size_t>(r)];
  row_of_[static_cast<std::size_t>(leaving)] = -1;
  basis_[static_cast<std::size_t>(r)] = q;
  row_of_[static_cast<std::size_t>(q)] = r;
  state_[static_cast<std::size_t>(q)] = NonbasicAt::basic;
  ++pivots_since_refactor_;
  ++total_iterations_;
}

bool LpEngine::refactor() {
  ++refactors_;
  pivots_since_refactor_ = 0;
  // Rows whose logical is nonbasic pin down the basic structurals through a
  // square kernel; rows with a basic logical follow by substitution.
  std::vector<int> kernel_rows;
  std::vector<int> basic_structurals;
  for (int i = 0; i < m_; ++i) {
    if (state_[static_cast<std::size_t>(n_ + i)] != NonbasicAt::basic) kernel_rows.push_back(i);
  }
  for (int j = 0; j < n_; ++j) {
    if (state_[static_cast<std::size_t>(j)] == NonbasicAt::basic) basic_structurals.push_back(j);
  }
  const int k = static_cast<int>(kernel_rows.size());
  bool ok = k == static_cast<int>(basic_structurals.size());
  std::vector<double> kernel(static_cast<std::size_t>(k) * k, 0.0);
  if (ok) {
    std::vector<int> kernel_pos(static_cast<std::size_t>(m_), -1);
    for (int a = 0; a < k; ++a) kernel_pos[static_cast<std::size_t>(kernel_rows[static_cast<std::size_t>(a)])] = a;
    for (int b = 0; b < k; ++b) {
      for (const Term& t : col_entries_[static_cast<std::size_t>(basic_structurals[static_cast<std::size_t>(b)])]) {
        const int a = kernel_pos[static_cast<std::size_t>(t.var)];
        if (a >= 0) kernel[static_cast<std::size_t>(a) * k + b] = t.coef;
      }
    }
    ok = invert_dense(kernel, k);
  }
  if (!ok) {
    // Singular basis: fall back to the all-logical basis.
    std::fill(tableau_.begin(), tableau_.end(), 0.0);
    for (int i = 0; i < m_; ++i) {
      basis_[static_cast<std::size_t>(i)] = n_ + i;
      for (const Term& t : row_entries_[static_cast<std::size_t>(i)]) tab(i, t.var) = -t.coef;
      tab(i, n_ + i) = 1.0;
    }
    std::fill(row_of_.begin(), row_of_.end(), -1);
    for (int j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == NonbasicAt::basic) state_[static_cast<std::size_t>(j)] = NonbasicAt::lower;
      place_nonbasic(j, false);
    }
    for (int i = 0; i < m_; ++i) {
      row_of_[static_cast<std::size_t>(n_ + i)] = i;
      state_[static_cast<std::size_t>(n_ + i)] = NonbasicAt::basic;
    }
    return false;
  }

  std::fill(tableau_.begin(), tableau_.end(), 0.0);
  // Structural basic rows: T_u = K^{-1} [A -I]_{kernel rows}.
  for (int b = 0; b < k; ++b) {
    const int r = row_of_[static_cast<std::size_t>(basic_structurals[static_cast<std::size_t>(b)])];
    double* out = &tableau_[static_cast<std::size_t>(r) * cols_];
    for (int a = 0; a < k; ++a) {
      const double f = kernel[static_cast<std::size_t>(b) * k + a];
      if (f == 0.0) continue;
      const int i = kernel_rows[static_cast<std::size_t>(a)];
      for (const Term& t : row_entries_[static_cast<std::size_t>(i)]) out[t.var] += f * t.coef;
      out[n_ + i] -= f;
    }
  }
  // Logical basic rows: T_{s_i} = sum_u a_iu T_u - [A -I]_i.
  for (int i = 0; i < m_; ++i) {
    if (state_[static_cast<std::size_t>(n_ + i)] != NonbasicAt::basic) continue;
    const int r = row_of_[static_cast<std::size_t>(n_ + i)];
    double* out = &tableau_[static_cast<std::size_t>(r) * cols_];
    for (const Term& t : row_entries_[static_cast<std::size_t>(i)]) {
      const int ru = row_of_[static_cast<std::size_t>(t.var)];
      if (ru >= 0) {
        const double* src = &tableau_[static_cast<std::size_t>(ru) * cols_];
        for (std::size_t c = 0; c < cols_; ++c) {
          if (src[c] != 0.0) out[c] += t.coef * src[c];
        }
      }
    }
    for (const Term& t : row_entries_[static_cast<std::size_t>(i)]) out[t.var] -= t.coef;
    out[n_ + i] += 1.0;
  }
  for (double& v : tableau_) {
    if (std::abs(v) < kDropTolerance) v = 0.0;
  }
  for (int i = 0; i < m_; ++i) tab(i, basis_[static_cast<std::size_t>(i)]) = 1.0;
  return true;
}

bool LpEngine::confirm_infeasible(int r) {
  // Row r of B^-1 is minus the logical part of the tableau row. Rebuild the
  // combined constraint from the original rows and check that no point in the
  // bound box satisfies it.
  const double* trow = &tableau_[static_cast<std::size_t>(r) * cols_];
  std::vector<double> c(cols_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const double y = -trow[n_ + i];
    if (y == 0.0) continue;
    for (const Term& t : row_entries_[static_cast<std::size_t>(i)]) c[static_cast<std::size_t>(t.var)] += y * t.coef;
    c[static_cast<std::size_t>(n_ + i)] -= y;
  }
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  double lo_sum = 0.0, hi_sum = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < cols_; ++k) {
    if (std::abs(c[k]) <= tol_.pivot * cmax) continue;  // noise the ratio test also ignores
    const double a = c[k] > 0.0 ? lo_[k] : hi_[k];
    const double b = c[k] > 0.0 ? hi_[k] : lo_[k];
    lo_sum += c[k] * a;
    hi_sum += c[k] * b;
    if (finite(a)) scale = std::max(scale, std::abs(c[k] * a));
    if (finite(b)) scale = std::max(scale, std::abs(c[k] * b));
  }
  const double tol = 1e-9 * std::max(1.0, scale);
  if (lo_sum > tol || hi_sum < -tol) return true;
  ++unconfirmed_;
  refactor();
  recompute_basic_values();
  return false;
}

double LpEngine::residual() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    double activity = 0.0;
    double scale = 1.0;
    for (const Term& t : row_entries_[static_cast<std::size_t>(i)]) {
      const double term = t.coef * x_[static_cast<std::size_t>(t.var)];
      activity += term;
      scale = std::max(scale, std::abs(term));
    }
    worst = std::max(worst, std::abs(activity - x_[static_cast<std::size_t>(n_ + i)]) / scale);
  }
  return worst;
}

LpStatus LpEngine::dual_simplex(std::int64_t& budget) {
  struct Candidate {
    int col;
    double ratio;
    double alpha;
  };
  std::vector<Candidate> candidates;
  int& degenerate_run = degenerate_run_;
  while (true) {
    if (pivots_since_refactor_ >= kRefactorInterval) {
      refactor();
      recompute_basic_values();
      return LpStatus::numerical;  // caller restarts with fresh reduced costs
    }
    // After a long run of degenerate pivots both choices fall back to the
    // smallest variable index, which cannot cycle.
    const bool bland = degenerate_run > 50;
    int r = -1;
    double best = 0.0;
    for (int i = 0; i < m_; ++i) {
      const auto k = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
      const double v = x_[k];
      double infeasibility = 0.0;
      if (v < lo_[k] - tol_.primal * std::max(1.0, std::abs(lo_[k]))) {
        infeasibility = lo_[k] - v;
      } else if (v > hi_[k] + tol_.primal * std::max(1.0, std::abs(hi_[k]))) {
        infeasibility = v - hi_[k];
      }
      if (infeasibility <= 0.0) continue;
      if (bland ? (r < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(r)]) : infeasibility > best) {
        best = infeasibility;
        r = i;
      }
    }
    if (r < 0) return LpStatus::optimal;
    if (budget-- <= 0 || past_deadline()) return LpStatus::iteration_limit;

    const int leaving = basis_[static_cast<std::size_t>(r)];
    const auto ls = static_cast<std::size_t>(leaving);
    const bool to_lower = x_[ls] < lo_[ls];
    const double target = to_lower ? lo_[ls] : hi_[ls];
    double delta = target - x_[ls];
    // x_B[r] changes by -alpha_j dx_j; sgn picks the direction that helps.
    const double sgn = delta > 0.0 ? 1.0 : -1.0;
    const double* prow = &tableau_[static_cast<std::size_t>(r) * cols_];

    candidates.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      const NonbasicAt st = state_[j];
      if (st == NonbasicAt::basic || lo_[j] == hi_[j]) continue;
      const double alpha = prow[j];
      if (std::abs(alpha) < tol_.pivot) continue;
      // Moving x_j up changes x_B[r] by -alpha per unit.
      const bool up_helps = -alpha * sgn > 0.0;
      bool eligible = false;
      if (st == NonbasicAt::lower) eligible = up_helps;
      else if (st == NonbasicAt::upper) eligible = !up_helps;
      else eligible = true;
      if (!eligible) continue;
      const double dj = d_[j];
      double slack = 0.0;
      if (st == NonbasicAt::lower) slack = std::max(0.0, dj);
      else if (st == NonbasicAt::upper) slack = std::max(0.0, -dj);
      candidates.push_back({static_cast<int>(j), slack / std::abs(alpha), alpha});
    }
    if (candidates.empty()) return confirm_infeasible(r) ? LpStatus::infeasible : LpStatus::numerical;

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.ratio != b.ratio) return a.ratio < b.ratio;
      return a.col < b.col;
    });

    // Bound-flipping ratio test: pass boxed breakpoints while the dual
    // objective keeps improving.
    double slope = std::abs(delta);
    std::size_t chosen = candidates.size();
    std::size_t flips_end = 0;
    for (std::size_t c = 0; c < candidates.size() && !bland; ++c) {
      const auto j = static_cast<std::size_t>(candidates[c].col);
      const bool boxed = finite(lo_[j]) && finite(hi_[j]);
      if (boxed) {
        const double after = slope - std::abs(candidates[c].alpha) * (hi_[j] - lo_[j]);
        if (after > tol_.primal && c + 1 < candidates.size()) {
          slope = after;
          flips_end = c + 1;
          continue;
        }
      }
      chosen = c;
      break;
    }
    if (chosen == candidates.size()) {
      chosen = candidates.size() - 1;
      flips_end = std::min(flips_end, chosen);
    }
    if (bland) {
      // Smallest index among the tied breakpoints, skipping tiny pivots.
      const double limit = candidates[0].ratio + tol_.dual / std::max(1e-12, std::abs(candidates[0].alpha));
      double biggest = 0.0;
      std::size_t end = 0;
      while (end < candidates.size() && candidates[end].ratio <= limit) biggest = std::max(biggest, std::abs(candidates[end++].alpha));
      chosen = 0;
      int best_col = -1;
      for (std::size_t c = 0; c < end; ++c) {
        if (std::abs(candidates[c].alpha) < 1e-3 * biggest) continue;
        if (best_col < 0 || candidates[c].col < best_col) {
          best_col = candidates[c].col;
          chosen = c;
        }
      }
    }
    // Among breakpoints tied with the chosen one, take the largest pivot.
    if (!bland) {
      const double limit = candidates[chosen].ratio + tol_.dual / std::max(1e-12, std::abs(candidates[chosen].alpha));
      std::size_t best_c = chosen;
      for (std::size_t c = chosen + 1; c < candidates.size() && candidates[c].ratio <= limit; ++c) {
        if (std::abs(candidates[c].alpha) > std::abs(candidates[best_c].alpha)) best_c = c;
      }
      if (best_c != chosen) std::swap(candidates[chosen], candidates[best_c]);
    }

    // Apply bound flips.
    for (std::size_t c = 0; c < flips_end; ++c) {
      const auto j = static_cast<std::size_t>(candidates[c].col);
      double step;
      if (state_[j] == NonbasicAt::lower) {
        step = hi_[j] - lo_[j];
        state_[j] = NonbasicAt::upper;
        x_[j] = hi_[j];
      } else {
        step = lo_[j] - hi_[j];
        state_[j] = NonbasicAt::lower;
        x_[j] = lo_[j];
      }
      for (int i = 0; i < m_; ++i) {
        const double t = tableau_[static_cast<std::size_t>(i) * cols_ + j];
        if (t != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= t * step;
      }
    }

    const int q = candidates[chosen].col;
    const auto qs = static_cast<std::size_t>(q);
    const double alpha_q = prow[q];
    degenerate_run = candidates[chosen].ratio * std::abs(delta) < 1e-12 ? degenerate_run + 1 : 0;
    delta = target - x_[ls];
    const double dx = -delta / alpha_q;
    for (int i = 0; i < m_; ++i) {
      const double t = tableau_[static_cast<std::size_t>(i) * cols_ + qs];
      if (t != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= t * dx;
    }
    x_[qs] += dx;
    pivot(r, q);
    x_[ls] = target;
    state_[ls] = (to_lower || lo_[ls] == hi_[ls]) ? NonbasicAt::lower : NonbasicAt::upper;
  }
}

LpStatus LpEngine::primal_simplex(std::int64_t& budget) {
  int& degenerate_run = degenerate_run_;
  while (true) {
    if (pivots_since_refactor_ >= kRefactorInterval) {
      refactor();
      recompute_basic_values();
      return LpStatus::numerical;
    }
    const bool bland = degenerate_run > 50;
    int q = -1;
    double best = 0.0;
    double dir = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      const NonbasicAt st = state_[j];
      if (st == NonbasicAt::basic || lo_[j] == hi_[j]) continue;
      const double dj = d_[j];
      double score = 0.0;
      double this_dir = 0.0;
      if (st == NonbasicAt::lower && dj < -tol_.dual) { score = -dj; this_dir = 1.0; }
      else if (st == NonbasicAt::upper && dj > tol_.dual) { score = dj; this_dir = -1.0; }
      else if (st == NonbasicAt::zero && std::abs(dj) > tol_.dual) { score = std::abs(dj); this_dir = dj > 0.0 ? -1.0 : 1.0; }
      if (score <= 0.0) continue;
      if (bland) { q = static_cast<int>(j); dir = this_dir; break; }
      if (score > best) { best = score; q = static_cast<int>(j); dir = this_dir; }
    }
    if (q < 0) return LpStatus::optimal;
    if (budget-- <= 0 || past_deadline()) return LpStatus::iteration_limit;
    const auto qs = static_cast<std::size_t>(q);

    double step = (finite(lo_[qs]) && finite(hi_[qs])) ? hi_[qs] - lo_[qs] : kInfinity;
    int leave = -1;
    double leave_alpha = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double alpha = tableau_[static_cast<std::size_t>(i) * cols_ + qs];
      if (std::abs(alpha) < tol_.pivot) continue;
      const double rate = -alpha * dir;
      const auto k = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
      double limit = kInfinity;
      if (rate < 0.0 && finite(lo_[k])) limit = std::max(0.0, x_[k] - lo_[k]) / -rate;
      else if (rate > 0.0 && finite(hi_[k])) limit = std::max(0.0, hi_[k] - x_[k]) / rate;
      if (!finite(limit)) continue;
      const bool better = limit < step - 1e-12 ||
                          (limit <= step + 1e-12 && leave >= 0 &&
                           (bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                                  : std::abs(alpha) > std::abs(leave_alpha)));
      if (better || (leave < 0 && limit <= step)) {
        step = std::min(step, limit);
        leave = i;
        leave_alpha = alpha;
      }
    }
    if (!finite(step)) return LpStatus::unbounded;
    degenerate_run = step < 1e-12 ? degenerate_run + 1 : 0;

    for (int i = 0; i < m_; ++i) {
      const double alpha = tableau_[static_cast<std::size_t>(i) * cols_ + qs];
      if (alpha != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= alpha * dir * step;
    }
    x_[qs] += dir * step;
    if (leave < 0) {
      state_[qs] = dir > 0.0 ? NonbasicAt::upper : NonbasicAt::lower;
      x_[qs] = dir > 0.0 ? hi_[qs] : lo_[qs];
      continue;
    }
    const int leaving = basis_[static_cast<std::size_t>(leave)];
    const auto ls = static_cast<std::size_t>(leaving);
    const double rate = -leave_alpha * dir;
    pivot(leave, q);
    if (rate < 0.0) {
      x_[ls] = lo_[ls];
      state_[ls] = NonbasicAt::lower;
    } else {
      x_[ls] = hi_[ls];
      state_[ls] = lo_[ls] == hi_[ls] ? NonbasicAt::lower : NonbasicAt::upper;
    }
  }
}

LpSolution LpEngine::solve(std::int64_t iteration_limit) {
  std::int64_t budget = iteration_limit;
  const std::int64_t start_iterations = total_iterations_;
  const std::vector<double> zero_cost(cols_, 0.0);

  LpStatus status = LpStatus::numerical;
  int residual_retries = 0;
  unconfirmed_ = 0;
  degenerate_run_ = 0;
  while (true) {
    recompute_reduced_costs(cost_);
    for (std::size_t k = 0; k < cols_; ++k) {
      if (state_[k] != NonbasicAt::basic) place_nonbasic(static_cast<int>(k), true);
    }
    recompute_basic_values();

    if (dual_feasible()) {
      status = dual_simplex(budget);
    } else {
      d_ = zero_cost;
      status = dual_simplex(budget);
      if (status == LpStatus::optimal) {
        recompute_reduced_costs(cost_);
        status = primal_simplex(budget);
      }
    }
    // `numerical` from the simplex loops means "refactored, start over".
    if (status == LpStatus::numerical) {
      if (unconfirmed_ > 3) break;
      continue;
    }
    if (status == LpStatus::optimal) {
      if (residual() > 1e-9 && residual_retries < 3) {
        ++residual_retries;
        refactor();
        recompute_basic_values();
        continue;
      }
      // Harris-style choices can leave tiny wrong-signed reduced costs.
      recompute_reduced_costs(cost_);
      if (!dual_feasible()) {
        status = primal_simplex(budget);
        if (status == LpStatus::numerical) continue;
      }
    }
    break;
  }
  if (status == LpStatus::optimal && residual() > 1e-7) status = LpStatus::numerical;
  LpSolution sol = extract(status);
  sol.iterations = total_iterations_ - start_iterations;
  return sol;
}

LpBasis LpEngine::basis() const {
  LpBasis b;
  b.basic = basis_;
  b.status.reserve(cols_);
  for (NonbasicAt st : state_) b.status.push_back(static_cast<std::uint8_t>(st));
  return b;
}

void LpEngine::set_basis(const LpBasis& b) {
  if (b.basic.size() != static_cast<std::size_t>(m_) || b.status.size() != cols_) {
    throw std::invalid_argument("set_basis: basis from a different model");
  }
  basis_ = b.basic;
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (int i = 0; i < m_; ++i) row_of_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;
  for (std::size_t k = 0; k < cols_; ++k) state_[k] = static_cast<NonbasicAt>(b.status[k]);
  for (std::size_t k = 0; k < cols_; ++k) {
    if (state_[k] != NonbasicAt::basic) place_nonbasic(static_cast<int>(k), false);
  }
  refactor();
  recompute_basic_values();
}

LpSolution LpEngine::extract(LpStatus status) {
  LpSolution sol;
  sol.status = status;
  if (status != LpStatus::optimal) return sol;
  sol.x.assign(x_.begin(), x_.begin() + n_);
  // Snap values that sit on a bound within tolerance.
  for (int j = 0; j < n_; ++j) {
    auto& v = sol.x[static_cast<std::size_t>(j)];
    const double lo = lo_[static_cast<std::size_t>(j)];
    const double hi = hi_[static_cast<std::size_t>(j)];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
  }
  sol.objective = 0.0;
  for (int j = 0; j < n_; ++j) sol.objective += cost_[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
  sol.reduced_costs.assign(d_.begin(), d_.begin() + n_);
  sol.row_duals.assign(d_.begin() + n_, d_.end());
  return sol;
}

LpSolution solve_lp(const MilpModel& model) {
  LpEngine engine(model);
  return engine.solve();
}

}  // namespace ptlayout::milp
