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

// A small capacity-expansion model on an arbitrary chain, with a closed-form
// cost for fixed integer decisions.

#ifndef MCAGG_TESTS_TOY_MODEL_H_
#define MCAGG_TESTS_TOY_MODEL_H_

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "mcagg/model.h"
#include "mcagg/tree.h"

namespace mcagg::testing {

// Integer z builds units of capacity that arrive one stage later; capacity
// x serves demand through production y, unmet demand u is penalized.
struct ToyParams {
  double build_cost = 5.0;
  double unit_capacity = 3.0;
  double initial_capacity = 1.0;
  double production_cost = 1.0;
  double shortfall_cost = 10.0;
  double max_build = 2.0;
  double max_step = 1.0;             // z_n - z_parent <= max_step
  bool allow_shortfall = true;       // false makes unmet demand infeasible
  std::vector<double> demand = {2.0, 6.0};  // indexed by chain state
};

inline std::shared_ptr<const NodeData> toy_node_data(const ToyParams& tp, bool root,
                                                     double demand) {
  auto nd = std::make_shared<NodeData>();
  nd->int_own = SparseMatrix(1, 1, {{0, 0, 1.0}});
  if (!root) nd->int_parent = SparseMatrix(1, 1, {{0, 0, 1.0}});
  nd->int_rhs = {tp.max_step};
  nd->int_sense = {Sense::kLessEqual};

  // Rows: capacity balance, production limit, demand.
  nd->link_state = SparseMatrix(3, 1, {{0, 0, 1.0}, {1, 0, -1.0}});
  nd->link_int = SparseMatrix(3, 1);
  nd->link_local = SparseMatrix(3, 2, {{1, 0, 1.0}, {2, 0, 1.0}, {2, 1, 1.0}});
  if (!root) {
    nd->link_parent = SparseMatrix(3, 1, {{0, 0, 1.0}});
    nd->link_lag = {SparseMatrix(3, 1, {{0, 0, tp.unit_capacity}})};
  }
  nd->link_rhs = {root ? tp.initial_capacity : 0.0, 0.0, demand};
  nd->link_sense = {Sense::kEqual, Sense::kLessEqual, Sense::kGreaterEqual};

  nd->int_cost = {tp.build_cost};
  nd->state_cost = {0.0};
  nd->local_cost = {tp.production_cost, tp.shortfall_cost};
  nd->int_lower = {0.0};
  nd->int_upper = {tp.max_build};
  nd->state_lower = {0.0};
  nd->state_upper = {kInf};
  nd->local_lower = {0.0, 0.0};
  nd->local_upper = {kInf, tp.allow_shortfall ? kInf : 0.0};
  nd->realization = {demand};
  return nd;
}

inline Msilp toy_model(std::shared_ptr<const ScenarioTree> tree, const ToyParams& tp = {}) {
  std::map<std::pair<int, int>, std::shared_ptr<const NodeData>> cache;
  std::vector<std::shared_ptr<const NodeData>> data;
  for (int n = 0; n < tree->num_nodes(); ++n) {
    const TreeNode& node = tree->node(n);
    auto key = std::make_pair(node.stage, node.mc_state);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, toy_node_data(tp, node.stage == 1, tp.demand[node.mc_state])).first;
    }
    data.push_back(it->second);
  }
  Msilp m(std::move(tree), Dims{1, 1, 2}, std::move(data));
  m.state_names = {"cap"};
  m.int_names = {"build"};
  m.local_names = {"prod", "short"};
  return m;
}

// Expected cost of fixed per-node builds, or +inf when infeasible.
inline double toy_cost(const ScenarioTree& tree, const ToyParams& tp,
                       const std::vector<double>& build) {
  std::vector<double> cap(tree.num_nodes());
  double total = 0.0;
  for (int n = 0; n < tree.num_nodes(); ++n) {
    const TreeNode& node = tree.node(n);
    const double prev = node.parent >= 0 ? build[node.parent] : 0.0;
    if (build[n] < 0 || build[n] > tp.max_build || build[n] - prev > tp.max_step) {
      return std::numeric_limits<double>::infinity();
    }
    cap[n] = node.parent < 0 ? tp.initial_capacity
                             : cap[node.parent] + tp.unit_capacity * build[node.parent];
    const double d = tp.demand[node.mc_state];
    const double served = std::min(cap[n], d);
    if (!tp.allow_shortfall && served < d - 1e-9) return std::numeric_limits<double>::infinity();
    total += node.p * (tp.build_cost * build[n] + tp.production_cost * served +
                       tp.shortfall_cost * (d - served));
  }
  return total;
}

}  // namespace mcagg::testing

#endif  // MCAGG_TESTS_TOY_MODEL_H_
