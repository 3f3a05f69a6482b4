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

// Multi-stage stochastic integer programs on a scenario tree and their
// extensive forms.

#ifndef MCAGG_MODEL_H_
#define MCAGG_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mcagg/aggregate.h"
#include "mcagg/lp.h"
#include "mcagg/mip.h"
#include "mcagg/tree.h"

namespace mcagg {

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed sparse rows. Duplicate entries are summed and entries with
// magnitude below 1e-12 are dropped on construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<Triplet> entries = {});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(index_.size()); }
  bool empty() const { return index_.empty(); }
  int row_begin(int i) const { return start_[i]; }
  int row_end(int i) const { return start_[i + 1]; }
  int index(int k) const { return index_[k]; }
  double value(int k) const { return value_[k]; }
  // y = this * x
  std::vector<double> multiply(const std::vector<double>& x) const;
  bool operator==(const SparseMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> start_ = {0};
  std::vector<int> index_;
  std::vector<double> value_;
};

// Data of one node. With x the continuous states, z the integer states and
// y the local variables of the node, and a subscript p for the parent:
//   integer rows:  int_own z     (sense)  int_parent z_p + int_rhs
//   state rows:    state_own x   (sense)  state_parent x_p + state_rhs
//   linking rows:  link_state x + link_int z + link_local y  (sense)
//                  link_parent x_p + sum_k link_lag[k] z_(k+1) + link_rhs
// where z_(k) is the integer state of the ancestor k stages up.
struct NodeData {
  SparseMatrix int_own, int_parent;
  std::vector<double> int_rhs;
  std::vector<Sense> int_sense;

  SparseMatrix state_own, state_parent;
  std::vector<double> state_rhs;
  std::vector<Sense> state_sense;

  SparseMatrix link_state, link_int, link_local, link_parent;
  std::vector<SparseMatrix> link_lag;
  std::vector<double> link_rhs;
  std::vector<Sense> link_sense;

  std::vector<double> int_cost, state_cost, local_cost;
  std::vector<double> int_lower, int_upper;
  std::vector<double> state_lower, state_upper;
  std::vector<double> local_lower, local_upper;

  // Observed data used as decision-rule basis; empty means link_rhs followed
  // by state_rhs.
  std::vector<double> realization;

  int num_int_rows() const { return static_cast<int>(int_rhs.size()); }
  int num_state_rows() const { return static_cast<int>(state_rhs.size()); }
  int num_link_rows() const { return static_cast<int>(link_rhs.size()); }
  std::vector<double> basis_realization() const;
  bool operator==(const NodeData&) const = default;
};

struct Dims {
  int state = 0;    // k
  int integer = 0;  // l
  int local = 0;    // r
};

class Msilp {
 public:
  Msilp(std::shared_ptr<const ScenarioTree> tree, Dims dims,
        std::vector<std::shared_ptr<const NodeData>> data);

  const ScenarioTree& tree() const { return *tree_; }
  std::shared_ptr<const ScenarioTree> tree_ptr() const { return tree_; }
  const Dims& dims() const { return dims_; }
  const NodeData& data(int n) const { return *data_.at(n); }
  const std::shared_ptr<const NodeData>& data_ptr(int n) const { return data_.at(n); }
  // Largest ancestor lag referenced by any linking block.
  int max_lag() const { return max_lag_; }

  // Lower bound on every cost-to-go value; bounds the epigraph variables of
  // the decomposition methods.
  double value_lower_bound = 0.0;
  std::vector<std::string> state_names, int_names, local_names;

 private:
  std::shared_ptr<const ScenarioTree> tree_;
  Dims dims_;
  std::vector<std::shared_ptr<const NodeData>> data_;
  int max_lag_ = 0;
};

// Every violated invariant as a readable message; empty when valid.
std::vector<std::string> validate(const Msilp& m);

// Column positions in an extensive form.
struct ExtensiveLayout {
  std::vector<int> state_col;  // first x column of each node
  std::vector<int> local_col;  // first y column of each node
  std::vector<int> int_col;    // first z column used by each node
  std::vector<int> group_col;  // first column of each group (aggregated form)
};

inline constexpr std::int64_t kDefaultVariableCap = 5'000'000;

// One (x, y, z) block and one copy of every row per node. Throws Overflow
// when the column count exceeds cap.
MipProblem build_extensive_form(const Msilp& m, ExtensiveLayout* layout = nullptr,
                                std::int64_t cap = kDefaultVariableCap);

// Integer blocks indexed by the groups of agg; identical rows are merged.
MipProblem build_aggregated_extensive_form(const Msilp& m, const AggregationMap& agg,
                                           ExtensiveLayout* layout = nullptr,
                                           std::int64_t cap = kDefaultVariableCap);

// First-stage part of the aggregated form: every group column, every integer
// row (merged) with the integer costs of all nodes, and the continuous
// columns and rows of the root only.
MipProblem build_first_stage_problem(const Msilp& m, const AggregationMap& agg,
                                     ExtensiveLayout* layout = nullptr);

// Expands group values of the aggregated form into per-node integer values.
std::vector<std::vector<double>> expand_groups(const Msilp& m, const AggregationMap& agg,
                                               const std::vector<std::vector<double>>& groups);

}  // namespace mcagg

#endif  // MCAGG_MODEL_H_
