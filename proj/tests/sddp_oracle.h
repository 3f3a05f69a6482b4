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

// Independent subtree value: the expected cost below a node as one LP, with
// the parent state and integer values supplied directly.

#ifndef MCAGG_TESTS_SDDP_ORACLE_H_
#define MCAGG_TESTS_SDDP_ORACLE_H_

#include <functional>
#include <vector>

#include "mcagg/aggregate.h"
#include "mcagg/lp.h"
#include "mcagg/model.h"
#include "mcagg/sddp.h"

namespace mcagg::testing {

// Integer values seen by a node: z(a) for ancestor or descendant a.
using IntegerLookup = std::function<std::vector<double>(int node)>;

// Expected cost of the subtree rooted at n conditioned on reaching n.
// Returns +inf when infeasible.
inline double subtree_value(const Msilp& m, int n, const std::vector<double>& parent_state,
                            const IntegerLookup& z) {
  const ScenarioTree& tree = m.tree();
  const Dims d = m.dims();
  std::vector<int> nodes;
  std::vector<int> stack = {n};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    nodes.push_back(v);
    const TreeNode& node = tree.node(v);
    for (int c = node.first_child; c >= 0 && c < node.first_child + node.num_children; ++c) {
      stack.push_back(c);
    }
  }
  std::vector<int> base(tree.num_nodes(), -1);
  LpProblem lp;
  const double pn = tree.node(n).p;
  for (int v : nodes) {
    const NodeData& nd = m.data(v);
    const double w = tree.node(v).p / pn;
    base[v] = lp.num_cols();
    for (int j = 0; j < d.state; ++j) {
      lp.add_column(w * nd.state_cost[j], nd.state_lower[j], nd.state_upper[j]);
    }
    for (int j = 0; j < d.local; ++j) {
      lp.add_column(w * nd.local_cost[j], nd.local_lower[j], nd.local_upper[j]);
    }
  }
  auto dot_row = [](const SparseMatrix& a, int i, const std::vector<double>& v) {
    double s = 0.0;
    if (a.empty()) return s;
    for (int k = a.row_begin(i); k < a.row_end(i); ++k) s += a.value(k) * v[a.index(k)];
    return s;
  };
  auto add_row = [&](LpRow row, Sense sense, double rhs) {
    row.set_sense(sense, rhs);
    lp.add_row(std::move(row));
  };
  for (int v : nodes) {
    const NodeData& nd = m.data(v);
    const int parent = tree.node(v).parent;
    const bool top = v == n;
    for (int i = 0; i < nd.num_state_rows(); ++i) {
      LpRow row;
      for (int k = nd.state_own.row_begin(i); k < nd.state_own.row_end(i); ++k) {
        row.add(base[v] + nd.state_own.index(k), nd.state_own.value(k));
      }
      double rhs = nd.state_rhs[i];
      if (!nd.state_parent.empty()) {
        for (int k = nd.state_parent.row_begin(i); k < nd.state_parent.row_end(i); ++k) {
          if (top) {
            rhs += nd.state_parent.value(k) * parent_state[nd.state_parent.index(k)];
          } else {
            row.add(base[parent] + nd.state_parent.index(k), -nd.state_parent.value(k));
          }
        }
      }
      add_row(std::move(row), nd.state_sense[i], rhs);
    }
    for (int i = 0; i < nd.num_link_rows(); ++i) {
      LpRow row;
      if (!nd.link_state.empty()) {
        for (int k = nd.link_state.row_begin(i); k < nd.link_state.row_end(i); ++k) {
          row.add(base[v] + nd.link_state.index(k), nd.link_state.value(k));
        }
      }
      if (!nd.link_local.empty()) {
        for (int k = nd.link_local.row_begin(i); k < nd.link_local.row_end(i); ++k) {
          row.add(base[v] + d.state + nd.link_local.index(k), nd.link_local.value(k));
        }
      }
      double rhs = nd.link_rhs[i] - dot_row(nd.link_int, i, z(v));
      if (!nd.link_parent.empty()) {
        for (int k = nd.link_parent.row_begin(i); k < nd.link_parent.row_end(i); ++k) {
          if (top) {
            rhs += nd.link_parent.value(k) * parent_state[nd.link_parent.index(k)];
          } else {
            row.add(base[parent] + nd.link_parent.index(k), -nd.link_parent.value(k));
          }
        }
      }
      int anc = parent;
      for (size_t k = 0; k < nd.link_lag.size(); ++k) {
        if (!nd.link_lag[k].empty()) rhs += dot_row(nd.link_lag[k], i, z(anc));
        if (anc >= 0) anc = tree.node(anc).parent;
      }
      add_row(std::move(row), nd.link_sense[i], rhs);
    }
  }
  const LpSolution sol = LpSolver(lp).solve();
  if (sol.status == LpStatus::kInfeasible) return kInf;
  return sol.objective;
}

// Integer lookup from per-group values.
inline IntegerLookup group_lookup(const AggregationMap& agg, const std::vector<double>& groups,
                                  int block) {
  return [&agg, groups, block](int node) {
    const int g = agg.node_group[node];
    return std::vector<double>(groups.begin() + g * block, groups.begin() + (g + 1) * block);
  };
}

// Integer lookup for node n of a subproblem, reading everything from the
// parameter vector p: an ancestor k steps up uses lag block k, any other node
// the block of its group.
inline IntegerLookup param_lookup(const Msilp& m, const AggregationMap& agg,
                                  const ParamLayout& lay, int n, const std::vector<double>& p) {
  return [&m, &agg, lay, n, p](int a) {
    const int block = lay.block;
    std::vector<double> z(block, 0.0);
    if (a < 0) return z;
    int k = 0;
    int v = n;
    while (v >= 0 && v != a) {
      v = m.tree().node(v).parent;
      ++k;
    }
    const int offset = v == a && k > 0 ? lay.lag_offset(k)
                                       : lay.group_offset(lay.find_group(agg.node_group[a]));
    for (int l = 0; l < block; ++l) z[l] = p[offset + l];
    return z;
  };
}

}  // namespace mcagg::testing

#endif  // MCAGG_TESTS_SDDP_ORACLE_H_
