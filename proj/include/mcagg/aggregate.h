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

// History transformations that tie integer state variables together, the
// resulting node groups, and the policy graph of SDDP subproblems.

#ifndef MCAGG_AGGREGATE_H_
#define MCAGG_AGGREGATE_H_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mcagg/tree.h"

namespace mcagg {

enum class TransformKind {
  kHN,  // one group per stage
  kMA,  // current state
  kMM,  // previous and current state
  kPM,  // selected attributes of the previous state and the current state
  kFH,  // full history
};

struct Transformation {
  TransformKind kind = TransformKind::kFH;
  std::vector<int> partial_attrs;  // used by kPM only
};

const char* to_string(TransformKind kind);
// Accepts hn, ma, mm, pm, fh in any case. Throws InvalidArgument.
TransformKind parse_transform(const std::string& name);

// Selection matrix applied to the flattened history of a stage-t node. The
// zero 1 x (s t) row is used for kHN; kMM and kPM fall back to the kMA matrix
// at t = 1. Throws InvalidStage for t < 1 and InvalidArgument for a bad
// partial attribute set.
Eigen::MatrixXi build_phi(const Transformation& tr, int t, int s);

// Node groups. Group ids are global, stage-major, and numbered in order of
// first appearance among node ids.
struct AggregationMap {
  Transformation transform;
  std::vector<int> node_group;
  std::vector<int> group_stage;
  std::vector<std::vector<int>> group_key;
  std::vector<std::vector<int>> group_members;
  std::vector<int> stage_group_begin;  // indexed by stage, size T + 2

  int num_groups() const { return static_cast<int>(group_stage.size()); }
  int groups_in_stage(int t) const {
    return stage_group_begin[t + 1] - stage_group_begin[t];
  }
};

AggregationMap build_aggregation(const ScenarioTree& tree, const Transformation& tr);

// True when every group of a lies inside a group of b.
bool refines(const AggregationMap& a, const AggregationMap& b);

// Quotient of the tree by the key (stage, state, group) over stages >= 2.
struct PolicyGraph {
  struct Subproblem {
    int stage = 0;
    int mc_state = 0;
    int group = 0;
    std::vector<int> nodes;
    std::vector<std::pair<int, double>> children;  // (subproblem, probability)
  };
  std::vector<Subproblem> subs;
  std::vector<int> node_sub;  // -1 for the root
  std::vector<int> stage_begin;  // indexed by stage, size T + 2

  int num_subproblems() const { return static_cast<int>(subs.size()); }
  int subproblems_in_stage(int t) const { return stage_begin[t + 1] - stage_begin[t]; }
};

// Throws InvalidArgument if two nodes sharing a key have different child
// keys or probabilities.
PolicyGraph build_policy_graph(const ScenarioTree& tree, const AggregationMap& agg);

}  // namespace mcagg

#endif  // MCAGG_AGGREGATE_H_
