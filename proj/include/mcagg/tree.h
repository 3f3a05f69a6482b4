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

// Scenario trees generated by enumerating Markov chain paths.

#ifndef MCAGG_TREE_H_
#define MCAGG_TREE_H_

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "mcagg/markov.h"

namespace mcagg {

struct TreeNode {
  int id = 0;
  int stage = 1;
  int mc_state = 0;  // index into the chain
  int parent = -1;
  int first_child = -1;
  int num_children = 0;
  double p = 1.0;       // unconditional probability
  double p_cond = 1.0;  // probability of reaching it from its parent
};

// Node ids are assigned breadth first, so each stage and each sibling group
// occupies a contiguous id range. Stages are numbered from 1.
class ScenarioTree {
 public:
  ScenarioTree(std::shared_ptr<const MarkovChain> chain, std::vector<TreeNode> nodes,
               int stages);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int stages() const { return stages_; }
  int root() const { return 0; }
  // Throws UnknownNode.
  const TreeNode& node(int n) const;
  int stage_begin(int t) const;
  int stage_end(int t) const;
  int stage_size(int t) const { return stage_end(t) - stage_begin(t); }
  const McState& mc_state(int n) const { return chain_->state(node(n).mc_state); }
  const MarkovChain& chain() const { return *chain_; }
  std::shared_ptr<const MarkovChain> chain_ptr() const { return chain_; }

 private:
  std::shared_ptr<const MarkovChain> chain_;
  std::vector<TreeNode> nodes_;
  std::vector<int> stage_start_;
  int stages_ = 0;
};

inline constexpr std::int64_t kDefaultNodeCap = 10'000'000;

// Children with probability below 1e-15 are dropped. Throws InvalidArgument
// when T < 1 or a non-final node ends up without children, Overflow when
// the node count exceeds cap.
ScenarioTree build_tree(std::shared_ptr<const MarkovChain> chain, int T,
                        std::int64_t cap = kDefaultNodeCap);

// Root-first node ids from the root to n. Throws UnknownNode.
std::vector<int> path(const ScenarioTree& tree, int n);
// States along path(n).
std::vector<McState> mc_history(const ScenarioTree& tree, int n);
// mc_history flattened to s * stage(n) integers.
std::vector<int> flat_history(const ScenarioTree& tree, int n);

// Writes "parent,child,p_cond" lines with a header.
void write_edge_csv(const ScenarioTree& tree, std::ostream& out);

}  // namespace mcagg

#endif  // MCAGG_TREE_H_
