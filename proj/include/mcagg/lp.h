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

// Linear programs in bounded-row form and a revised simplex solver.
//
// A problem is   min  c'x + offset
//                s.t. row_lower <= A x <= row_upper
//                     col_lower <=  x  <= col_upper
//
// Dual values use the natural sign convention: a multiplier is nonnegative
// when the row is held at its lower bound and nonpositive at its upper bound,
// so d(objective)/d(bound) equals the multiplier.

#ifndef MCAGG_LP_H_
#define MCAGG_LP_H_

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mcagg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { kGreaterEqual, kLessEqual, kEqual };

// One sparse row with its activity bounds.
struct LpRow {
  std::vector<int> index;
  std::vector<double> value;
  double lower = -kInf;
  double upper = kInf;

  void add(int col, double coef) {
    index.push_back(col);
    value.push_back(coef);
  }
  void set_sense(Sense sense, double rhs);
};

struct LpProblem {
  std::vector<double> cost;
  std::vector<double> col_lower;
  std::vector<double> col_upper;
  std::vector<std::string> col_names;
  std::vector<LpRow> rows;
  std::vector<std::string> row_names;
  double objective_offset = 0.0;

  int num_cols() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  int add_column(double obj, double lower = 0.0, double upper = kInf,
                 std::string name = {});
  int add_row(LpRow row, std::string name = {});
  int add_row(std::vector<int> index, std::vector<double> value, Sense sense,
              double rhs, std::string name = {});

  // Throws DimensionMismatch or InvalidArgument on malformed data.
  void check() const;
};

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kAtZero };

// Simplex basis over structural columns followed by row logicals.
struct Basis {
  std::vector<VarStatus> col_status;
  std::vector<VarStatus> row_status;
  bool empty() const { return col_status.empty() && row_status.empty(); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> row_activity;
  std::vector<double> dual;
  std::vector<double> reduced_cost;
  // Row multipliers y (natural signs) proving infeasibility: the bound
  // implied on y'Ax by the column box lies strictly below the one implied
  // by the row box. Empty unless status is kInfeasible.
  std::vector<double> farkas_ray;
  Basis basis;
  int iterations = 0;
};

struct LpOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_interval = 100;
  int max_iterations = 0;  // 0 selects a size-based default.
};

// Certificate bookkeeping shared by the solver and the tests.
struct FarkasCheck {
  double column_support = 0.0;  // max over the column box of (A'y)'x
  double row_support = 0.0;     // min over the row box of y'r
  bool valid = false;
};
FarkasCheck check_farkas(const LpProblem& p, std::span<const double> ray,
                         double tol = 1e-9);

// Returns the certificate of an infeasible solve in the form where every
// one-sided row is read as a >= row: entries of <= rows are negated, so the
// result is nonnegative on inequality rows.
std::vector<double> farkas_ray_ge_form(const LpProblem& p,
                                       std::span<const double> ray);

// Stateful solver. Bounds, objective and rows may be changed between calls
// to solve(); the last basis is reused so re-solves are warm.
class LpSolver {
 public:
  explicit LpSolver(LpProblem problem, LpOptions options = {});
  ~LpSolver();
  LpSolver(LpSolver&&) noexcept;
  LpSolver& operator=(LpSolver&&) noexcept;

  const LpProblem& problem() const;
  void set_col_bounds(int col, double lower, double upper);
  void set_row_bounds(int row, double lower, double upper);
  void set_cost(int col, double cost);
  // Appends rows; the logicals of new rows enter the basis. Returns the index
  // of the first added row.
  int add_rows(std::span<const LpRow> rows);
  void set_basis(const Basis& basis);
  Basis basis() const;
  LpSolution solve();
  // Total simplex iterations over the solver's lifetime.
  std::int64_t total_iterations() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

LpSolution solve_lp(const LpProblem& p, const Basis* warm = nullptr,
                    LpOptions options = {});

// Appends rows to p in place. Throws DimensionMismatch when a row refers to
// a missing column.
void add_rows(LpProblem& p, std::span<const LpRow> rows);

}  // namespace mcagg

#endif  // MCAGG_LP_H_
