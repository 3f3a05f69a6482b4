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

#include "mcagg/tree.h"

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>

#include "mcagg/errors.h"

namespace mcagg {

ScenarioTree::ScenarioTree(std::shared_ptr<const MarkovChain> chain,
                           std::vector<TreeNode> nodes, int stages)
    : chain_(std::move(chain)), nodes_(std::move(nodes)), stages_(stages) {
  stage_start_.assign(stages_ + 2, num_nodes());
  for (int n = num_nodes() - 1; n >= 0; --n) stage_start_[nodes_[n].stage] = n;
  for (int t = stages_; t >= 1; --t) {
    stage_start_[t] = std::min(stage_start_[t], stage_start_[t + 1]);
  }
}

const TreeNode& ScenarioTree::node(int n) const {
  if (n < 0 || n >= num_nodes()) throw UnknownNode("node " + std::to_string(n));
  return nodes_[n];
}

int ScenarioTree::stage_begin(int t) const {
  if (t < 1 || t > stages_) throw InvalidStage("stage " + std::to_string(t));
  return stage_start_[t];
}

int ScenarioTree::stage_end(int t) const {
  if (t < 1 || t > stages_) throw InvalidStage("stage " + std::to_string(t));
  return stage_start_[t + 1];
}

ScenarioTree build_tree(std::shared_ptr<const MarkovChain> chain, int T,
                        std::int64_t cap) {
  if (T < 1) throw InvalidArgument("tree needs at least one stage");
  std::vector<TreeNode> nodes;
  TreeNode root;
  root.mc_state = chain->initial();
  nodes.push_back(root);
  int begin = 0;
  for (int t = 1; t < T; ++t) {
    const int end = static_cast<int>(nodes.size());
    for (int n = begin; n < end; ++n) {
      nodes[n].first_child = static_cast<int>(nodes.size());
      for (const auto& e : chain->successors(nodes[n].mc_state)) {
        const double p = nodes[n].p * e.prob;
        if (p < 1e-15) continue;
        if (static_cast<std::int64_t>(nodes.size()) >= cap) {
          throw Overflow("scenario tree exceeds " + std::to_string(cap) + " nodes");
        }
        TreeNode child;
        child.id = static_cast<int>(nodes.size());
        child.stage = t + 1;
        child.mc_state = e.to;
        child.parent = n;
        child.p = p;
        child.p_cond = e.prob;
        nodes.push_back(child);
      }
      nodes[n].num_children = static_cast<int>(nodes.size()) - nodes[n].first_child;
      if (nodes[n].num_children == 0) {
        throw InvalidArgument("node " + std::to_string(n) + " at stage " +
                              std::to_string(t) + " has no successors");
      }
    }
    begin = end;
  }
  for (TreeNode& node : nodes) {
    if (node.num_children == 0) node.first_child = -1;
  }
  return ScenarioTree(std::move(chain), std::move(nodes), T);
}

std::vector<int> path(const ScenarioTree& tree, int n) {
  std::vector<int> out(tree.node(n).stage);
  for (int k = static_cast<int>(out.size()) - 1; k >= 0; --k) {
    out[k] = n;
    n = tree.node(n).parent;
  }
  return out;
}

std::vector<McState> mc_history(const ScenarioTree& tree, int n) {
  std::vector<McState> out;
  for (int id : path(tree, n)) out.push_back(tree.mc_state(id));
  return out;
}

std::vector<int> flat_history(const ScenarioTree& tree, int n) {
  std::vector<int> out;
  for (int id : path(tree, n)) {
    const auto& a = tree.mc_state(id).attrs;
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

void write_edge_csv(const ScenarioTree& tree, std::ostream& out) {
  out << "parent,child,p_cond\n";
  char buf[64];
  for (int n = 1; n < tree.num_nodes(); ++n) {
    const TreeNode& node = tree.node(n);
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", node.parent, n, node.p_cond);
    out << buf;
  }
}

}  // namespace mcagg
