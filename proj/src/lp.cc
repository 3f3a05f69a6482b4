// Copyright 2026 The mcagg Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcagg/lp.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "mcagg/errors.h"

namespace mcagg {

void LpRow::set_sense(Sense sense, double rhs) {
  switch (sense) {
    case Sense::kGreaterEqual:
      lower = rhs;
      upper = kInf;
      break;
    case Sense::kLessEqual:
      lower = -kInf;
      upper = rhs;
      break;
    case Sense::kEqual:
      lower = rhs;
      upper = rhs;
      break;
  }
}

int LpProblem::add_column(double obj, double lower, double upper,
                          std::string name) {
  cost.push_back(obj);
  col_lower.push_back(lower);
  col_upper.push_back(upper);
  col_names.push_back(std::move(name));
  return num_cols() - 1;
}

int LpProblem::add_row(LpRow row, std::string name) {
  rows.push_back(std::move(row));
  row_names.push_back(std::move(name));
  return num_rows() - 1;
}

int LpProblem::add_row(std::vector<int> index, std::vector<double> value,
                       Sense sense, double rhs, std::string name) {
  LpRow row;
  row.index = std::move(index);
  row.value = std::move(value);
  row.set_sense(sense, rhs);
  return add_row(std::move(row), std::move(name));
}

void LpProblem::check() const {
  const int n = num_cols();
  if (col_lower.size() != cost.size() || col_upper.size() != cost.size()) {
    throw DimensionMismatch("column bound vectors differ in length");
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(cost[j])) throw InvalidArgument("non-finite cost");
    if (std::isnan(col_lower[j]) || std::isnan(col_upper[j])) {
      throw InvalidArgument("NaN column bound");
    }
  }
  for (const LpRow& row : rows) {
    if (row.index.size() != row.value.size()) {
      throw DimensionMismatch("row index/value length mismatch");
    }
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      if (row.index[k] < 0 || row.index[k] >= n) {
        throw DimensionMismatch("row refers to column " +
                                std::to_string(row.index[k]));
      }
      if (!std::isfinite(row.value[k])) {
        throw InvalidArgument("non-finite coefficient");
      }
    }
    if (std::isnan(row.lower) || std::isnan(row.upper)) {
      throw InvalidArgument("NaN row bound");
    }
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "?";
}

FarkasCheck check_farkas(const LpProblem& p, std::span<const double> ray,
                         double tol) {
  FarkasCheck out;
  if (static_cast<int>(ray.size()) != p.num_rows()) return out;
  std::vector<double> g(p.num_cols(), 0.0);
  double ymax = 0.0;
  double scale = 0.0;
  double row_support = 0.0;
  for (int i = 0; i < p.num_rows(); ++i) {
    const double y = ray[i];
    if (y == 0.0) continue;
    ymax = std::max(ymax, std::abs(y));
    const LpRow& row = p.rows[i];
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      g[row.index[k]] += y * row.value[k];
    }
    const double bound = y > 0 ? row.lower : row.upper;
    if (!std::isfinite(bound)) return out;
    row_support += y * bound;
    scale += std::abs(y * bound);
  }
  double column_support = 0.0;
  for (int j = 0; j < p.num_cols(); ++j) {
    const double gj = g[j];
    const double bound = gj > 0 ? p.col_upper[j] : p.col_lower[j];
    if (gj == 0.0) continue;
    if (!std::isfinite(bound)) {
      if (std::abs(gj) <= tol * (1.0 + ymax)) continue;
      return out;
    }
    column_support += gj * bound;
    scale += std::abs(gj * bound);
  }
  out.column_support = column_support;
  out.row_support = row_support;
  out.valid = row_support - column_support > tol * (1.0 + scale);
  return out;
}

std::vector<double> farkas_ray_ge_form(const LpProblem& p,
                                       std::span<const double> ray) {
  std::vector<double> out(ray.begin(), ray.end());
  for (int i = 0; i < p.num_rows() && i < static_cast<int>(out.size()); ++i) {
    const LpRow& row = p.rows[i];
    if (!std::isfinite(row.lower) && std::isfinite(row.upper)) out[i] = -out[i];
  }
  return out;
}

namespace {

// LU factors of the basis matrix plus a product-form eta file.
class BasisFactor {
 public:
  bool factorize(const Eigen::SparseMatrix<double>& b) {
    m_ = static_cast<int>(b.rows());
    etas_.clear();
    if (m_ == 0) return true;
    lu_.analyzePattern(b);
    lu_.factorize(b);
    return lu_.info() == Eigen::Success;
  }

  void ftran(std::vector<double>& v) const {
    if (m_ == 0) return;
    Eigen::Map<Eigen::VectorXd> vm(v.data(), m_);
    Eigen::VectorXd r = lu_.solve(vm);
    vm = r;
    for (const Eta& e : etas_) {
      const double vp = v[e.pos] / e.pivot;
      if (vp != 0.0) {
        for (std::size_t k = 0; k < e.idx.size(); ++k) {
          v[e.idx[k]] -= e.val[k] * vp;
        }
      }
      v[e.pos] = vp;
    }
  }

  void btran(std::vector<double>& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->pos];
      for (std::size_t k = 0; k < it->idx.size(); ++k) {
        s -= it->val[k] * v[it->idx[k]];
      }
      v[it->pos] = s / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> vm(v.data(), m_);
    Eigen::VectorXd r = lu_.transpose().solve(vm);
    vm = r;
  }

  void update(int pos, const std::vector<double>& w) {
    Eta e;
    e.pos = pos;
    e.pivot = w[pos];
    for (int i = 0; i < m_; ++i) {
      if (i != pos && w[i] != 0.0) {
        e.idx.push_back(i);
        e.val.push_back(w[i]);
      }
    }
    etas_.push_back(std::move(e));
  }

  int num_updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int pos = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };
  int m_ = 0;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>
      lu_;
  std::vector<Eta> etas_;
};

enum class Outcome { kOptimal, kInfeasible, kUnbounded, kFailed };

constexpr int kDegenerateLimit = 60;

}  // namespace

class LpSolver::Impl {
 public:
  Impl(LpProblem problem, LpOptions options)
      : problem_(std::move(problem)), opt_(options) {
    problem_.check();
    if (problem_.col_names.size() != problem_.cost.size()) {
      problem_.col_names.resize(problem_.cost.size());
    }
    if (problem_.row_names.size() != problem_.rows.size()) {
      problem_.row_names.resize(problem_.rows.size());
    }
    n_ = problem_.num_cols();
    m_ = 0;
    cols_.assign(n_, {});
    lower_ = problem_.col_lower;
    upper_ = problem_.col_upper;
    cost_ = problem_.cost;
    status_.assign(n_, VarStatus::kAtLower);
    x_.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) status_[j] = default_status(j);
    std::vector<LpRow> rows = std::move(problem_.rows);
    problem_.rows.clear();
    std::vector<std::string> names = std::move(problem_.row_names);
    problem_.row_names.clear();
    append_rows(rows);
    problem_.row_names = std::move(names);
  }

  const LpProblem& problem() const { return problem_; }

  void set_col_bounds(int j, double lower, double upper) {
    check_col(j);
    problem_.col_lower[j] = lower_[j] = lower;
    problem_.col_upper[j] = upper_[j] = upper;
  }

  void set_row_bounds(int i, double lower, double upper) {
    if (i < 0 || i >= m_) throw DimensionMismatch("row index out of range");
    problem_.rows[i].lower = lower_[n_ + i] = lower;
    problem_.rows[i].upper = upper_[n_ + i] = upper;
  }

  void set_cost(int j, double c) {
    check_col(j);
    problem_.cost[j] = cost_[j] = c;
  }

  int add_rows(std::span<const LpRow> rows) {
    for (const LpRow& row : rows) {
      if (row.index.size() != row.value.size()) {
        throw DimensionMismatch("row index/value length mismatch");
      }
      for (int c : row.index) {
        if (c < 0 || c >= n_) throw DimensionMismatch("row refers to bad column");
      }
    }
    const int first = m_;
    append_rows(rows);
    problem_.row_names.resize(problem_.rows.size());
    return first;
  }

  void set_basis(const Basis& basis) {
    std::vector<VarStatus> st(n_ + m_);
    for (int j = 0; j < n_; ++j) {
      st[j] = j < static_cast<int>(basis.col_status.size())
                  ? basis.col_status[j]
                  : default_status(j);
    }
    for (int i = 0; i < m_; ++i) {
      st[n_ + i] = i < static_cast<int>(basis.row_status.size())
                       ? basis.row_status[i]
                       : VarStatus::kBasic;
    }
    int basic = 0;
    for (VarStatus s : st) basic += s == VarStatus::kBasic;
    if (basic != m_) {
      slack_basis();
      return;
    }
    status_ = std::move(st);
    head_.clear();
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == VarStatus::kBasic) head_.push_back(j);
    }
    factor_valid_ = false;
  }

  Basis basis() const {
    Basis b;
    b.col_status.assign(status_.begin(), status_.begin() + n_);
    b.row_status.assign(status_.begin() + n_, status_.end());
    return b;
  }

  std::int64_t total_iterations() const { return total_iterations_; }

  LpSolution solve();

 private:
  int num_vars() const { return n_ + m_; }

  void check_col(int j) const {
    if (j < 0 || j >= n_) throw DimensionMismatch("column index out of range");
  }

  VarStatus default_status(int j) const {
    if (std::isfinite(lower_[j])) return VarStatus::kAtLower;
    if (std::isfinite(upper_[j])) return VarStatus::kAtUpper;
    return VarStatus::kAtZero;
  }

  void append_rows(std::span<const LpRow> rows) {
    for (const LpRow& row : rows) {
      const int i = m_;
      for (std::size_t k = 0; k < row.index.size(); ++k) {
        if (row.value[k] != 0.0) cols_[row.index[k]].emplace_back(i, row.value[k]);
      }
      problem_.rows.push_back(row);
      lower_.push_back(row.lower);
      upper_.push_back(row.upper);
      cost_.push_back(0.0);
      status_.push_back(VarStatus::kBasic);
      x_.push_back(0.0);
      head_.push_back(n_ + i);
      ++m_;
    }
    factor_valid_ = false;
  }

  void slack_basis() {
    head_.clear();
    for (int j = 0; j < n_; ++j) status_[j] = default_status(j);
    for (int i = 0; i < m_; ++i) {
      status_[n_ + i] = VarStatus::kBasic;
      head_.push_back(n_ + i);
    }
    factor_valid_ = false;
  }

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (const auto& [i, v] : cols_[j]) f(i, v);
    } else {
      f(j - n_, -1.0);
    }
  }

  double dot_column(const std::vector<double>& y, int j) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (const auto& [i, v] : cols_[j]) s += y[i] * v;
    return s;
  }

  void dense_column(int j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for_column(j, [&](int i, double v) { out[i] += v; });
  }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case VarStatus::kAtLower:
        return lower_[j];
      case VarStatus::kAtUpper:
        return upper_[j];
      default:
        return 0.0;
    }
  }

  // Repairs statuses that point at infinite bounds after bound changes.
  void normalize_statuses() {
    for (int j = 0; j < num_vars(); ++j) {
      VarStatus& s = status_[j];
      if (s == VarStatus::kBasic) continue;
      if (s == VarStatus::kAtLower && !std::isfinite(lower_[j])) s = default_status(j);
      if (s == VarStatus::kAtUpper && !std::isfinite(upper_[j])) s = default_status(j);
      if (s == VarStatus::kAtZero && (std::isfinite(lower_[j]) || std::isfinite(upper_[j]))) {
        s = default_status(j);
      }
      if (j >= n_ && s == VarStatus::kAtZero) s = default_status(j);
    }
  }

  bool refactor() {
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::vector<Eigen::Triplet<double>> trip;
      for (int k = 0; k < m_; ++k) {
        for_column(head_[k], [&](int i, double v) { trip.emplace_back(i, k, v); });
      }
      Eigen::SparseMatrix<double> b(m_, m_);
      b.setFromTriplets(trip.begin(), trip.end());
      b.makeCompressed();
      if (factor_.factorize(b)) {
        factor_valid_ = true;
        compute_primal();
        return true;
      }
      slack_basis();
    }
    return false;
  }

  void compute_primal() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < num_vars(); ++j) {
      if (status_[j] == VarStatus::kBasic) continue;
      x_[j] = nonbasic_value(j);
      if (x_[j] != 0.0) {
        const double xj = x_[j];
        for_column(j, [&](int i, double v) { rhs[i] -= v * xj; });
      }
    }
    factor_.ftran(rhs);
    for (int k = 0; k < m_; ++k) x_[head_[k]] = rhs[k];
  }

  double infeasibility(int j) const {
    if (x_[j] < lower_[j]) return lower_[j] - x_[j];
    if (x_[j] > upper_[j]) return x_[j] - upper_[j];
    return 0.0;
  }

  double max_primal_infeasibility() const {
    double worst = 0.0;
    for (int k = 0; k < m_; ++k) worst = std::max(worst, infeasibility(head_[k]));
    return worst;
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (int k = 0; k < m_; ++k) y[k] = cost_[head_[k]];
    factor_.btran(y);
  }

  double reduced_cost(const std::vector<double>& y, int j) const {
    return cost_[j] - dot_column(y, j);
  }

  // Flips boxed nonbasics to the bound their reduced cost prefers. Returns
  // false when some nonbasic stays dual infeasible.
  bool make_dual_feasible() {
    std::vector<double> y;
    compute_duals(y);
    bool flipped = false;
    for (int j = 0; j < num_vars(); ++j) {
      if (status_[j] == VarStatus::kBasic || lower_[j] == upper_[j]) continue;
      const double d = reduced_cost(y, j);
      if (status_[j] == VarStatus::kAtLower && d < -opt_.dual_tol) {
        if (!std::isfinite(upper_[j])) return false;
        status_[j] = VarStatus::kAtUpper;
        flipped = true;
      } else if (status_[j] == VarStatus::kAtUpper && d > opt_.dual_tol) {
        if (!std::isfinite(lower_[j])) return false;
        status_[j] = VarStatus::kAtLower;
        flipped = true;
      } else if (status_[j] == VarStatus::kAtZero && std::abs(d) > opt_.dual_tol) {
        return false;
      }
    }
    if (flipped) compute_primal();
    return true;
  }

  // Magnitude of the terms summed into the reduced cost of column j.
  double dual_scale(const std::vector<double>& y, int j) const {
    if (j >= n_) return 1.0 + std::abs(y[j - n_]);
    double s = 1.0 + std::abs(cost_[j]);
    for (const auto& [i, v] : cols_[j]) s += std::abs(y[i] * v);
    return s;
  }

  // Largest reduced cost violation relative to its scale.
  double max_dual_infeasibility() const {
    std::vector<double> y;
    compute_duals(y);
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
      if (status_[j] == VarStatus::kBasic || lower_[j] == upper_[j]) continue;
      const double d = reduced_cost(y, j);
      double v = 0.0;
      if (status_[j] == VarStatus::kAtLower) v = -d;
      else if (status_[j] == VarStatus::kAtUpper) v = d;
      else v = std::abs(d);
      if (v > 0.0) worst = std::max(worst, v / dual_scale(y, j));
    }
    return worst;
  }

  bool budget_exhausted() const { return iterations_ >= max_iterations_; }

  Outcome primal();
  Outcome dual();
  bool certify_infeasible();
  bool accept_ray();
  LpSolution make_solution(LpStatus status);

  LpProblem problem_;
  LpOptions opt_;
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lower_, upper_, cost_;
  std::vector<VarStatus> status_;
  std::vector<int> head_;
  std::vector<double> x_;
  BasisFactor factor_;
  bool factor_valid_ = false;
  std::vector<double> ray_;
  int iterations_ = 0;
  int max_iterations_ = 0;
  std::int64_t total_iterations_ = 0;
};

Outcome LpSolver::Impl::primal() {
  const double ptol = opt_.primal_tol;
  const double dtol = opt_.dual_tol;
  const double piv = opt_.pivot_tol;
  const double harris = ptol * 1e-2;
  std::vector<double> y(m_), w(m_);
  // Columns whose improving direction met no bound although their reduced
  // cost is within the relative tolerance; skipped until the next pivot.
  std::vector<char> rejected(num_vars(), 0);
  int degenerate = 0;
  int stalls = 0;
  while (true) {
    if (budget_exhausted()) return Outcome::kFailed;
    if (factor_.num_updates() >= opt_.refactor_interval && !refactor()) {
      return Outcome::kFailed;
    }
    bool phase1 = false;
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      if (x_[j] < lower_[j] - ptol || x_[j] > upper_[j] + ptol) {
        phase1 = true;
        break;
      }
    }
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      if (!phase1) {
        y[k] = cost_[j];
      } else if (x_[j] < lower_[j] - ptol) {
        y[k] = -1.0;
      } else if (x_[j] > upper_[j] + ptol) {
        y[k] = 1.0;
      } else {
        y[k] = 0.0;
      }
    }
    factor_.btran(y);
    const bool bland = degenerate > kDegenerateLimit;
    int q = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
      if (status_[j] == VarStatus::kBasic || lower_[j] == upper_[j] || rejected[j]) continue;
      const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(y, j);
      int dj = 0;
      if (status_[j] == VarStatus::kAtLower && d < -dtol) dj = 1;
      else if (status_[j] == VarStatus::kAtUpper && d > dtol) dj = -1;
      else if (status_[j] == VarStatus::kAtZero && std::abs(d) > dtol) dj = d < 0 ? 1 : -1;
      if (dj == 0) continue;
      if (bland) {
        best = std::abs(d);
        q = j;
        dir = dj;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        q = j;
        dir = dj;
      }
    }
    if (q < 0) {
      if (phase1) {
        ray_ = y;
        return Outcome::kInfeasible;
      }
      return Outcome::kOptimal;
    }
    dense_column(q, w);
    factor_.ftran(w);

    // Ratio test. Candidates record the exact step and the bound reached.
    double flip = dir > 0 ? upper_[q] - x_[q] : x_[q] - lower_[q];
    double relaxed_min = kInf;
    auto exact_ratio = [&](int k, bool relaxed, bool& to_upper) -> double {
      const int j = head_[k];
      const double delta = -dir * w[k];
      const double h = relaxed ? harris : 0.0;
      if (delta < 0) {
        if (x_[j] > upper_[j] + ptol) {
          to_upper = true;
          return (x_[j] - upper_[j]) / -delta;
        }
        if (std::isfinite(lower_[j]) && x_[j] >= lower_[j] - ptol) {
          to_upper = false;
          return std::max(0.0, x_[j] - lower_[j] + h) / -delta;
        }
      } else {
        if (x_[j] < lower_[j] - ptol) {
          to_upper = false;
          return (lower_[j] - x_[j]) / delta;
        }
        if (std::isfinite(upper_[j]) && x_[j] <= upper_[j] + ptol) {
          to_upper = true;
          return std::max(0.0, upper_[j] - x_[j] + h) / delta;
        }
      }
      return kInf;
    };
    int p = -1;
    bool p_to_upper = false;
    double theta = kInf;
    // Bland mode keeps the first minimum ratio, ties to the lowest variable.
    if (!bland) {
      for (int k = 0; k < m_; ++k) {
        if (std::abs(w[k]) <= piv) continue;
        bool tu = false;
        relaxed_min = std::min(relaxed_min, exact_ratio(k, true, tu));
      }
      double best_pivot = 0.0;
      for (int k = 0; k < m_; ++k) {
        if (std::abs(w[k]) <= piv) continue;
        bool tu = false;
        const double r = exact_ratio(k, false, tu);
        if (std::isfinite(r) && r <= relaxed_min && std::abs(w[k]) > best_pivot) {
          best_pivot = std::abs(w[k]);
          p = k;
          p_to_upper = tu;
          theta = r;
        }
      }
    } else {
      for (int k = 0; k < m_; ++k) {
        if (std::abs(w[k]) <= piv) continue;
        bool tu = false;
        const double r = exact_ratio(k, false, tu);
        if (!std::isfinite(r)) continue;
        if (r < theta || (r == theta && p >= 0 && head_[k] < head_[p])) {
          theta = r;
          p = k;
          p_to_upper = tu;
        }
      }
    }
    const bool do_flip = std::isfinite(flip) && (p < 0 || flip <= theta);
    if (p < 0 && !do_flip) {
      if (!phase1) {
        if (best <= 10 * dtol * dual_scale(y, q)) {
          rejected[q] = 1;
          continue;
        }
        ray_.clear();
        return Outcome::kUnbounded;
      }
      if (++stalls > 3) return Outcome::kFailed;
      if (!refactor()) return Outcome::kFailed;
      continue;
    }
    const double step = do_flip ? flip : std::max(theta, 0.0);
    if (step != 0.0) {
      x_[q] += dir * step;
      for (int k = 0; k < m_; ++k) {
        if (w[k] != 0.0) x_[head_[k]] -= dir * step * w[k];
      }
    }
    if (do_flip) {
      status_[q] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_[q] = dir > 0 ? upper_[q] : lower_[q];
    } else {
      const int leaving = head_[p];
      status_[leaving] = p_to_upper ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_[leaving] = p_to_upper ? upper_[leaving] : lower_[leaving];
      head_[p] = q;
      status_[q] = VarStatus::kBasic;
      factor_.update(p, w);
    }
    std::fill(rejected.begin(), rejected.end(), 0);
    degenerate = step < 1e-12 ? degenerate + 1 : 0;
    ++iterations_;
  }
}

Outcome LpSolver::Impl::dual() {
  const double ptol = opt_.primal_tol;
  const double dtol = opt_.dual_tol;
  const double piv = opt_.pivot_tol;
  std::vector<double> y(m_), rho(m_), w(m_);
  std::vector<double> d(num_vars()), alpha(num_vars());
  int degenerate = 0;
  int mismatches = 0;
  while (true) {
    if (budget_exhausted()) return Outcome::kFailed;
    if (factor_.num_updates() >= opt_.refactor_interval && !refactor()) {
      return Outcome::kFailed;
    }
    const bool bland = degenerate > kDegenerateLimit;
    int p = -1;
    double worst = ptol;
    int s = 0;
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      double v = 0.0;
      int sk = 0;
      if (x_[j] < lower_[j] - ptol) {
        v = lower_[j] - x_[j];
        sk = 1;
      } else if (x_[j] > upper_[j] + ptol) {
        v = x_[j] - upper_[j];
        sk = -1;
      }
      if (sk == 0) continue;
      if (bland) {
        if (p < 0 || j < head_[p]) {
          p = k;
          s = sk;
        }
      } else if (v > worst) {
        worst = v;
        p = k;
        s = sk;
      }
    }
    if (p < 0) return Outcome::kOptimal;
    std::fill(rho.begin(), rho.end(), 0.0);
    rho[p] = 1.0;
    factor_.btran(rho);
    compute_duals(y);
    double relaxed_min = kInf;
    for (int j = 0; j < num_vars(); ++j) {
      alpha[j] = 0.0;
      if (status_[j] == VarStatus::kBasic || lower_[j] == upper_[j]) continue;
      alpha[j] = dot_column(rho, j);
      d[j] = reduced_cost(y, j);
      const double a = s * alpha[j];
      double r = kInf;
      if (status_[j] == VarStatus::kAtLower && a < -piv) {
        r = (std::max(d[j], 0.0) + dtol) / -a;
      } else if (status_[j] == VarStatus::kAtUpper && a > piv) {
        r = (std::max(-d[j], 0.0) + dtol) / a;
      } else if (status_[j] == VarStatus::kAtZero && std::abs(a) > piv) {
        r = (std::abs(d[j]) + dtol) / std::abs(a);
      }
      relaxed_min = std::min(relaxed_min, r);
    }
    int q = -1;
    double best_pivot = 0.0;
    double t_best = kInf;
    for (int j = 0; j < num_vars(); ++j) {
      if (alpha[j] == 0.0) continue;
      const double a = s * alpha[j];
      double r = kInf;
      if (status_[j] == VarStatus::kAtLower && a < -piv) {
        r = std::max(d[j], 0.0) / -a;
      } else if (status_[j] == VarStatus::kAtUpper && a > piv) {
        r = std::max(-d[j], 0.0) / a;
      } else if (status_[j] == VarStatus::kAtZero && std::abs(a) > piv) {
        r = std::abs(d[j]) / std::abs(a);
      }
      if (!std::isfinite(r)) continue;
      if (bland) {
        if (r < t_best) {
          t_best = r;
          q = j;
        }
      } else if (r <= relaxed_min && std::abs(a) > best_pivot) {
        best_pivot = std::abs(a);
        q = j;
        t_best = r;
      }
    }
    if (q < 0) {
      ray_ = rho;
      return Outcome::kInfeasible;
    }
    dense_column(q, w);
    factor_.ftran(w);
    if (std::abs(w[p]) <= piv ||
        std::abs(w[p] - alpha[q]) > 1e-7 * (1.0 + std::abs(alpha[q]))) {
      if (++mismatches > 3) return Outcome::kFailed;
      if (!refactor()) return Outcome::kFailed;
      continue;
    }
    const int leaving = head_[p];
    const double bound = s > 0 ? lower_[leaving] : upper_[leaving];
    const double delta = (x_[leaving] - bound) / w[p];
    x_[q] += delta;
    for (int k = 0; k < m_; ++k) {
      if (w[k] != 0.0) x_[head_[k]] -= delta * w[k];
    }
    status_[leaving] = s > 0 ? VarStatus::kAtLower : VarStatus::kAtUpper;
    x_[leaving] = bound;
    head_[p] = q;
    status_[q] = VarStatus::kBasic;
    factor_.update(p, w);
    degenerate = t_best < 1e-12 ? degenerate + 1 : 0;
    ++iterations_;
  }
}

// Runs the dual simplex on a zero objective; every basis is dual feasible,
// so it ends either feasible or with an infeasibility row. Leaves ray_ set
// on success.
bool LpSolver::Impl::certify_infeasible() {
  std::vector<double> saved = cost_;
  std::fill(cost_.begin(), cost_.end(), 0.0);
  const Outcome out = dual();
  cost_ = std::move(saved);
  if (out != Outcome::kInfeasible) return false;
  return accept_ray();
}

// Tries both signs of ray_, dropping round-off entries that would point at
// an infinite row bound. Keeps the first sign that certifies.
bool LpSolver::Impl::accept_ray() {
  double ymax = 0.0;
  for (double v : ray_) ymax = std::max(ymax, std::abs(v));
  if (ymax == 0.0) return false;
  for (double sign : {1.0, -1.0}) {
    std::vector<double> ray(ray_);
    for (int i = 0; i < m_; ++i) {
      double v = sign * ray[i];
      if (std::abs(v) <= 1e-12 * ymax) v = 0.0;
      if (v > 0 && !std::isfinite(lower_[n_ + i]) && v <= 1e-9 * ymax) v = 0.0;
      if (v < 0 && !std::isfinite(upper_[n_ + i]) && -v <= 1e-9 * ymax) v = 0.0;
      ray[i] = v;
    }
    if (check_farkas(problem_, ray).valid) {
      ray_ = std::move(ray);
      return true;
    }
  }
  return false;
}

LpSolution LpSolver::Impl::make_solution(LpStatus status) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations_;
  total_iterations_ += iterations_;
  sol.primal.assign(x_.begin(), x_.begin() + n_);
  sol.row_activity.assign(m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    for (const auto& [i, v] : cols_[j]) sol.row_activity[i] += v * x_[j];
  }
  double obj = problem_.objective_offset;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  sol.objective = obj;
  if (status == LpStatus::kOptimal) {
    compute_duals(sol.dual);
    sol.reduced_cost.resize(n_);
    for (int j = 0; j < n_; ++j) sol.reduced_cost[j] = reduced_cost(sol.dual, j);
  } else if (status == LpStatus::kInfeasible) {
    sol.farkas_ray = ray_;
  }
  sol.basis = basis();
  return sol;
}

LpSolution LpSolver::Impl::solve() {
  iterations_ = 0;
  max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                            : 20000 + 50 * (n_ + m_);
  for (int j = 0; j < num_vars(); ++j) {
    if (lower_[j] > upper_[j] + opt_.primal_tol) {
      // Crossed bounds on a single variable; no row certificate exists.
      LpSolution sol;
      sol.status = LpStatus::kInfeasible;
      sol.basis = basis();
      return sol;
    }
  }
  normalize_statuses();
  if (!factor_valid_) {
    if (!refactor()) throw NumericalFailure("basis factorization failed");
  } else {
    compute_primal();
  }
  for (int attempt = 0; attempt < 6; ++attempt) {
    Outcome out;
    if (max_primal_infeasibility() <= opt_.primal_tol) {
      out = primal();
    } else if (attempt < 3 && make_dual_feasible()) {
      out = dual();
      if (out == Outcome::kFailed) {
        out = primal();
      }
    } else {
      out = primal();
    }
    if (out == Outcome::kFailed) {
      total_iterations_ += iterations_;
      if (attempt >= 2) slack_basis();
      if (!refactor()) slack_basis();
      if (!factor_valid_ && !refactor()) break;
      iterations_ = 0;
      continue;
    }
    if (!refactor()) continue;
    if (out == Outcome::kOptimal) {
      if (max_primal_infeasibility() <= opt_.primal_tol &&
          max_dual_infeasibility() <= 10 * opt_.dual_tol) {
        return make_solution(LpStatus::kOptimal);
      }
      continue;
    }
    if (out == Outcome::kUnbounded) {
      if (max_primal_infeasibility() <= opt_.primal_tol) {
        return make_solution(LpStatus::kUnbounded);
      }
      continue;
    }
    bool ok = accept_ray();
    if (!ok) ok = certify_infeasible();
    if (ok) return make_solution(LpStatus::kInfeasible);
    if (!refactor()) break;
  }
  throw NumericalFailure("simplex did not converge");
}

LpSolver::LpSolver(LpProblem problem, LpOptions options)
    : impl_(std::make_unique<Impl>(std::move(problem), options)) {}
LpSolver::~LpSolver() = default;
LpSolver::LpSolver(LpSolver&&) noexcept = default;
LpSolver& LpSolver::operator=(LpSolver&&) noexcept = default;

const LpProblem& LpSolver::problem() const { return impl_->problem(); }
void LpSolver::set_col_bounds(int col, double lower, double upper) {
  impl_->set_col_bounds(col, lower, upper);
}
void LpSolver::set_row_bounds(int row, double lower, double upper) {
  impl_->set_row_bounds(row, lower, upper);
}
void LpSolver::set_cost(int col, double cost) { impl_->set_cost(col, cost); }
int LpSolver::add_rows(std::span<const LpRow> rows) { return impl_->add_rows(rows); }
void LpSolver::set_basis(const Basis& basis) { impl_->set_basis(basis); }
Basis LpSolver::basis() const { return impl_->basis(); }
LpSolution LpSolver::solve() { return impl_->solve(); }
std::int64_t LpSolver::total_iterations() const {
  return impl_->total_iterations();
}

LpSolution solve_lp(const LpProblem& p, const Basis* warm, LpOptions options) {
  LpSolver solver(p, options);
  if (warm != nullptr && !warm->empty()) solver.set_basis(*warm);
  return solver.solve();
}

void add_rows(LpProblem& p, std::span<const LpRow> rows) {
  for (const LpRow& row : rows) {
    if (row.index.size() != row.value.size()) {
      throw DimensionMismatch("row index/value length mismatch");
    }
    for (int c : row.index) {
      if (c < 0 || c >= p.num_cols()) {
        throw DimensionMismatch("row refers to column " + std::to_string(c));
      }
    }
  }
  for (const LpRow& row : rows) p.add_row(row);
}

}  // namespace mcagg
