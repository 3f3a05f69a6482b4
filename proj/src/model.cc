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

#include "mcagg/model.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include <fmt/format.h>

#include "mcagg/errors.h"

namespace mcagg {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols), start_(rows + 1, 0) {
  if (rows < 0 || cols < 0) throw DimensionMismatch("negative matrix dimension");
  for (const Triplet& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw DimensionMismatch(
          fmt::format("entry ({}, {}) outside {}x{} matrix", e.row, e.col, rows, cols));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  for (size_t k = 0; k < entries.size();) {
    size_t e = k;
    double sum = 0.0;
    while (e < entries.size() && entries[e].row == entries[k].row &&
           entries[e].col == entries[k].col) {
      sum += entries[e++].value;
    }
    if (std::abs(sum) >= 1e-12) {
      index_.push_back(entries[k].col);
      value_.push_back(sum);
      ++start_[entries[k].row + 1];
    }
    k = e;
  }
  for (int i = 0; i < rows; ++i) start_[i + 1] += start_[i];
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != cols_) {
    throw DimensionMismatch(fmt::format("vector of size {} for {} columns", x.size(), cols_));
  }
  std::vector<double> y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int k = start_[i]; k < start_[i + 1]; ++k) y[i] += value_[k] * x[index_[k]];
  }
  return y;
}

std::vector<double> NodeData::basis_realization() const {
  if (!realization.empty()) return realization;
  std::vector<double> out = link_rhs;
  out.insert(out.end(), state_rhs.begin(), state_rhs.end());
  return out;
}

Msilp::Msilp(std::shared_ptr<const ScenarioTree> tree, Dims dims,
             std::vector<std::shared_ptr<const NodeData>> data)
    : tree_(std::move(tree)), dims_(dims), data_(std::move(data)) {
  if (!tree_) throw InvalidArgument("null scenario tree");
  if (static_cast<int>(data_.size()) != tree_->num_nodes()) {
    throw DimensionMismatch(
        fmt::format("{} node data blocks for {} nodes", data_.size(), tree_->num_nodes()));
  }
  for (const auto& d : data_) {
    if (!d) throw InvalidArgument("null node data");
    for (int k = static_cast<int>(d->link_lag.size()); k > max_lag_; --k) {
      if (!d->link_lag[k - 1].empty()) {
        max_lag_ = k;
        break;
      }
    }
  }
}

namespace {

void check_matrix(std::vector<std::string>& out, int node, const char* name,
                  const SparseMatrix& a, int rows, int cols) {
  // An all-zero default matrix stands for an absent block.
  if (a.rows() == 0 && a.cols() == 0) return;
  if (a.rows() != rows || a.cols() != cols) {
    out.push_back(fmt::format("node {}: {} is {}x{}, expected {}x{}", node, name, a.rows(),
                              a.cols(), rows, cols));
  }
}

void check_size(std::vector<std::string>& out, int node, const char* name, size_t got,
                int want) {
  if (static_cast<int>(got) != want) {
    out.push_back(fmt::format("node {}: {} has size {}, expected {}", node, name, got, want));
  }
}

void check_bounds(std::vector<std::string>& out, int node, const char* name,
                  const std::vector<double>& lo, const std::vector<double>& hi,
                  bool need_finite) {
  for (size_t j = 0; j < lo.size() && j < hi.size(); ++j) {
    if (lo[j] > hi[j]) {
      out.push_back(fmt::format("node {}: {} {} has lower bound above upper bound", node,
                                name, j));
    }
    if (need_finite && (!std::isfinite(lo[j]) || !std::isfinite(hi[j]))) {
      out.push_back(fmt::format("node {}: integer variable {} is unbounded", node, j));
    }
  }
}

}  // namespace

std::vector<std::string> validate(const Msilp& m) {
  std::vector<std::string> out;
  const ScenarioTree& tree = m.tree();
  const Dims& d = m.dims();
  for (int n = 0; n < tree.num_nodes(); ++n) {
    const NodeData& nd = m.data(n);
    const int t = tree.node(n).stage;
    const int ir = nd.num_int_rows(), sr = nd.num_state_rows(), lr = nd.num_link_rows();
    check_matrix(out, n, "int_own", nd.int_own, ir, d.integer);
    check_matrix(out, n, "int_parent", nd.int_parent, ir, d.integer);
    check_matrix(out, n, "state_own", nd.state_own, sr, d.state);
    check_matrix(out, n, "state_parent", nd.state_parent, sr, d.state);
    check_matrix(out, n, "link_state", nd.link_state, lr, d.state);
    check_matrix(out, n, "link_int", nd.link_int, lr, d.integer);
    check_matrix(out, n, "link_local", nd.link_local, lr, d.local);
    check_matrix(out, n, "link_parent", nd.link_parent, lr, d.state);
    for (size_t k = 0; k < nd.link_lag.size(); ++k) {
      check_matrix(out, n, "link_lag", nd.link_lag[k], lr, d.integer);
      if (!nd.link_lag[k].empty() && static_cast<int>(k) + 1 >= t) {
        out.push_back(fmt::format("node {}: lag {} reaches above the root", n, k + 1));
      }
    }
    check_size(out, n, "int_sense", nd.int_sense.size(), ir);
    check_size(out, n, "state_sense", nd.state_sense.size(), sr);
    check_size(out, n, "link_sense", nd.link_sense.size(), lr);
    check_size(out, n, "int_cost", nd.int_cost.size(), d.integer);
    check_size(out, n, "state_cost", nd.state_cost.size(), d.state);
    check_size(out, n, "local_cost", nd.local_cost.size(), d.local);
    check_size(out, n, "int_lower", nd.int_lower.size(), d.integer);
    check_size(out, n, "int_upper", nd.int_upper.size(), d.integer);
    check_size(out, n, "state_lower", nd.state_lower.size(), d.state);
    check_size(out, n, "state_upper", nd.state_upper.size(), d.state);
    check_size(out, n, "local_lower", nd.local_lower.size(), d.local);
    check_size(out, n, "local_upper", nd.local_upper.size(), d.local);
    check_bounds(out, n, "integer variable", nd.int_lower, nd.int_upper, true);
    check_bounds(out, n, "state variable", nd.state_lower, nd.state_upper, false);
    check_bounds(out, n, "local variable", nd.local_lower, nd.local_upper, false);
    if (n == tree.root() &&
        (!nd.int_parent.empty() || !nd.state_parent.empty() || !nd.link_parent.empty())) {
      out.push_back("root node references a parent");
    }
  }
  // Data may depend only on the stage and the current chain state.
  std::map<std::pair<int, int>, int> first;
  for (int n = 0; n < tree.num_nodes(); ++n) {
    auto key = std::make_pair(tree.node(n).stage, tree.node(n).mc_state);
    auto [it, inserted] = first.emplace(key, n);
    if (!inserted && m.data_ptr(it->second) != m.data_ptr(n) &&
        !(m.data(it->second) == m.data(n))) {
      out.push_back(fmt::format("nodes {} and {} share stage {} and state {} but differ", it->second,
                                n, key.first, key.second));
    }
  }
  return out;
}

namespace {

using RowKey = std::tuple<std::vector<std::pair<int, double>>, double, double>;

class FormBuilder {
 public:
  FormBuilder(bool merge) : merge_(merge) {}

  void add_row(LpRow row, const std::string& name) {
    std::vector<std::pair<int, double>> entries;
    for (size_t k = 0; k < row.index.size(); ++k) entries.emplace_back(row.index[k], row.value[k]);
    std::sort(entries.begin(), entries.end());
    LpRow merged;
    for (size_t k = 0; k < entries.size();) {
      size_t e = k;
      double sum = 0.0;
      while (e < entries.size() && entries[e].first == entries[k].first) sum += entries[e++].second;
      if (std::abs(sum) >= 1e-12) merged.add(entries[k].first, sum);
      k = e;
    }
    merged.lower = row.lower;
    merged.upper = row.upper;
    if (merge_) {
      RowKey key;
      for (size_t k = 0; k < merged.index.size(); ++k) {
        std::get<0>(key).emplace_back(merged.index[k], merged.value[k]);
      }
      std::get<1>(key) = merged.lower;
      std::get<2>(key) = merged.upper;
      if (!seen_.insert(std::move(key)).second) return;
    }
    mip_.lp.add_row(std::move(merged), name);
  }

  MipProblem mip_;

 private:
  bool merge_;
  std::set<RowKey> seen_;
};

// Adds the rows  own * v_own - parent * v_parent (sense) rhs.
void add_block(FormBuilder& fb, const char* tag, int node, const SparseMatrix& own, int own_col,
               const SparseMatrix& parent, int parent_col, const std::vector<double>& rhs,
               const std::vector<Sense>& sense) {
  for (int i = 0; i < static_cast<int>(rhs.size()); ++i) {
    LpRow row;
    if (!own.empty()) {
      for (int k = own.row_begin(i); k < own.row_end(i); ++k) {
        row.add(own_col + own.index(k), own.value(k));
      }
    }
    if (!parent.empty() && parent_col >= 0) {
      for (int k = parent.row_begin(i); k < parent.row_end(i); ++k) {
        row.add(parent_col + parent.index(k), -parent.value(k));
      }
    }
    row.set_sense(sense[i], rhs[i]);
    fb.add_row(std::move(row), fmt::format("{}_{}_{}", tag, node, i));
  }
}

void append_row_terms(LpRow& row, const SparseMatrix& a, int i, int col, double scale) {
  if (a.empty()) return;
  for (int k = a.row_begin(i); k < a.row_end(i); ++k) row.add(col + a.index(k), scale * a.value(k));
}

// Shared builder; group_of maps a node to the index of its integer block and
// num_blocks is the number of such blocks.
MipProblem build_form(const Msilp& m, const std::vector<int>& group_of, int num_blocks,
                      bool merge, bool root_only, ExtensiveLayout* layout, std::int64_t cap) {
  if (auto problems = validate(m); !problems.empty()) {
    throw InvalidArgument("invalid model: " + problems.front());
  }
  const ScenarioTree& tree = m.tree();
  const Dims& d = m.dims();
  const int n_nodes = tree.num_nodes();
  const std::int64_t total = static_cast<std::int64_t>(num_blocks) * d.integer +
                             static_cast<std::int64_t>(n_nodes) * (d.state + d.local);
  if (total > cap) {
    throw Overflow(fmt::format("extensive form needs {} columns, cap is {}", total, cap));
  }
  auto name_of = [](const std::vector<std::string>& names, int j, const char* fallback) {
    return j < static_cast<int>(names.size()) ? names[j] : fmt::format("{}{}", fallback, j);
  };

  FormBuilder fb(merge);
  MipProblem& mip = fb.mip_;
  ExtensiveLayout lay;
  lay.group_col.assign(num_blocks, -1);
  lay.state_col.assign(n_nodes, -1);
  lay.local_col.assign(n_nodes, -1);
  lay.int_col.assign(n_nodes, -1);

  // Integer blocks in order of first use; costs are accumulated below.
  for (int n = 0; n < n_nodes; ++n) {
    const int g = group_of[n];
    const NodeData& nd = m.data(n);
    if (lay.group_col[g] < 0) {
      lay.group_col[g] = mip.lp.num_cols();
      for (int j = 0; j < d.integer; ++j) {
        mip.add_column(0.0, nd.int_lower[j], nd.int_upper[j], true,
                       fmt::format("{}_{}", name_of(m.int_names, j, "z"), g));
      }
    } else {
      // Members of a group share one block, so bounds must hold for all.
      for (int j = 0; j < d.integer; ++j) {
        const int c = lay.group_col[g] + j;
        mip.lp.col_lower[c] = std::max(mip.lp.col_lower[c], nd.int_lower[j]);
        mip.lp.col_upper[c] = std::min(mip.lp.col_upper[c], nd.int_upper[j]);
      }
    }
    lay.int_col[n] = lay.group_col[g];
  }
  for (int n = 0; n < n_nodes; ++n) {
    const NodeData& nd = m.data(n);
    const double p = tree.node(n).p;
    for (int j = 0; j < d.integer; ++j) mip.lp.cost[lay.int_col[n] + j] += p * nd.int_cost[j];
    if (root_only && n != tree.root()) continue;
    lay.state_col[n] = mip.lp.num_cols();
    for (int j = 0; j < d.state; ++j) {
      mip.add_column(p * nd.state_cost[j], nd.state_lower[j], nd.state_upper[j], false,
                     fmt::format("{}_{}", name_of(m.state_names, j, "x"), n));
    }
    lay.local_col[n] = mip.lp.num_cols();
    for (int j = 0; j < d.local; ++j) {
      mip.add_column(p * nd.local_cost[j], nd.local_lower[j], nd.local_upper[j], false,
                     fmt::format("{}_{}", name_of(m.local_names, j, "y"), n));
    }
  }

  for (int n = 0; n < n_nodes; ++n) {
    const NodeData& nd = m.data(n);
    const int par = tree.node(n).parent;
    const int par_int = par >= 0 ? lay.int_col[par] : -1;
    const int par_state = par >= 0 ? lay.state_col[par] : -1;
    add_block(fb, "int", n, nd.int_own, lay.int_col[n], nd.int_parent, par_int, nd.int_rhs,
              nd.int_sense);
    if (root_only && n != tree.root()) continue;
    add_block(fb, "state", n, nd.state_own, lay.state_col[n], nd.state_parent, par_state,
              nd.state_rhs, nd.state_sense);
    for (int i = 0; i < nd.num_link_rows(); ++i) {
      LpRow row;
      append_row_terms(row, nd.link_state, i, lay.state_col[n], 1.0);
      append_row_terms(row, nd.link_int, i, lay.int_col[n], 1.0);
      append_row_terms(row, nd.link_local, i, lay.local_col[n], 1.0);
      if (par >= 0) append_row_terms(row, nd.link_parent, i, par_state, -1.0);
      int anc = par;
      for (const SparseMatrix& lag : nd.link_lag) {
        if (anc < 0) break;
        append_row_terms(row, lag, i, lay.int_col[anc], -1.0);
        anc = tree.node(anc).parent;
      }
      row.set_sense(nd.link_sense[i], nd.link_rhs[i]);
      fb.add_row(std::move(row), fmt::format("link_{}_{}", n, i));
    }
  }
  if (layout) *layout = std::move(lay);
  return std::move(fb.mip_);
}

}  // namespace

MipProblem build_extensive_form(const Msilp& m, ExtensiveLayout* layout, std::int64_t cap) {
  const int n = m.tree().num_nodes();
  std::vector<int> own(n);
  for (int i = 0; i < n; ++i) own[i] = i;
  MipProblem mip = build_form(m, own, n, false, false, layout, cap);
  if (layout) layout->group_col.clear();
  return mip;
}

MipProblem build_aggregated_extensive_form(const Msilp& m, const AggregationMap& agg,
                                           ExtensiveLayout* layout, std::int64_t cap) {
  if (static_cast<int>(agg.node_group.size()) != m.tree().num_nodes()) {
    throw DimensionMismatch("aggregation map does not match the tree");
  }
  return build_form(m, agg.node_group, agg.num_groups(), true, false, layout, cap);
}

MipProblem build_first_stage_problem(const Msilp& m, const AggregationMap& agg,
                                     ExtensiveLayout* layout) {
  if (static_cast<int>(agg.node_group.size()) != m.tree().num_nodes()) {
    throw DimensionMismatch("aggregation map does not match the tree");
  }
  return build_form(m, agg.node_group, agg.num_groups(), true, true, layout,
                    kDefaultVariableCap);
}

std::vector<std::vector<double>> expand_groups(const Msilp& m, const AggregationMap& agg,
                                               const std::vector<std::vector<double>>& groups) {
  if (static_cast<int>(groups.size()) != agg.num_groups()) {
    throw DimensionMismatch("one value vector per group expected");
  }
  std::vector<std::vector<double>> out(m.tree().num_nodes());
  for (int n = 0; n < m.tree().num_nodes(); ++n) out[n] = groups[agg.node_group[n]];
  return out;
}

}  // namespace mcagg
