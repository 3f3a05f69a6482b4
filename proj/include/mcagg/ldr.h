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

// Two-stage linear decision rules over the aggregated model. Continuous
// states of non-root nodes are replaced by linear functions of node data,
// which leaves a two-stage program: integers, root decisions and rule
// coefficients in the first stage, and one recourse LP per node. The program
// is solved by branch-and-cut with Benders cuts aggregated per stage and
// chain state.

#ifndef MCAGG_LDR_H_
#define MCAGG_LDR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mcagg/aggregate.h"
#include "mcagg/mip.h"
#include "mcagg/model.h"
#include "mcagg/sddp.h"

namespace mcagg {

enum class LdrKind {
  kHistory,  // one rule per stage over the data of the whole path
  kStage,    // one rule per stage over the data of the node
  kMarkov,   // one rule per stage and chain state over the data of the node
};

const char* to_string(LdrKind kind);
// Accepts th, t, m (optionally prefixed with ldr-) in any case. Throws
// InvalidArgument.
LdrKind parse_ldr_kind(const std::string& name);

struct LdrVariant {
  LdrKind kind = LdrKind::kMarkov;
  bool intercept = true;  // appends a constant 1 to every basis vector
};

// Rule coefficient columns of one rule: states x basis entries, row-major.
struct LdrRule {
  int stage = 0;
  int mc_state = -1;  // -1 when shared by all states of the stage
  int states = 0;
  int basis_size = 0;
  int first_col = 0;
  int col(int state, int basis) const { return first_col + state * basis_size + basis; }
};

// Recourse LP of one or more nodes, with right-hand sides affine in the
// first-stage columns.
struct LdrRecourse {
  ParametricLp lp;
  std::vector<int> nodes;
  double probability = 0.0;  // sum of the node probabilities
  int cut_group = 0;
};

// Nodes of one stage and chain state sharing one value column.
struct LdrCutGroup {
  int stage = 0;
  int mc_state = 0;
  int theta_col = 0;
  std::vector<int> recourse;
};

struct LdrModel {
  LdrVariant variant;
  // First stage: group columns, root columns, rule columns, value columns.
  MipProblem master;
  ExtensiveLayout first_stage;
  std::vector<LdrRule> rules;
  std::vector<int> node_rule;               // -1 for the root
  std::vector<std::vector<double>> basis;   // per node, empty for the root
  std::vector<int> node_recourse;           // -1 for the root
  std::vector<LdrRecourse> recourse;
  std::vector<LdrCutGroup> cut_groups;      // stage-major, then by chain state
  int moved_rows = 0;  // linking rows without locals placed in the first stage

  int num_rule_columns() const;
};

// Throws Overflow when the first stage exceeds cap columns and
// InvalidArgument when the basis length varies within a stage.
LdrModel build_ldr_model(const Msilp& m, const AggregationMap& agg, const LdrVariant& variant,
                         std::int64_t cap = kDefaultVariableCap);

struct BendersStats {
  std::int64_t oracle_calls = 0;
  std::int64_t optimality_cuts = 0;
  std::int64_t feasibility_cuts = 0;
  std::int64_t recourse_solves = 0;
};

struct LdrCut {
  int group = 0;
  Cut cut;  // over the first-stage columns, value column excluded
};

struct LdrResult {
  MipSolution mip;
  BendersStats stats;
  std::vector<LdrCut> cuts;
  double seconds = 0.0;
};

// Throws InfeasibleModel when the first stage admits no feasible point.
LdrResult benders_solve(const LdrModel& model, double epsilon = 1e-6,
                        const MipOptions& options = {});

// Values of a recourse group at a first-stage point: the probability
// weighted sum of the recourse values, +inf when one is infeasible.
double recourse_value(const LdrModel& model, int group, std::span<const double> first_stage);

struct LdrPolicy {
  std::vector<std::vector<double>> state;  // per node
  std::vector<double> groups;              // integer values per group
  std::vector<double> rules;               // rule coefficients
};

LdrPolicy extract_policy(const Msilp& m, const AggregationMap& agg, const LdrModel& model,
                         std::span<const double> first_stage);

}  // namespace mcagg

#endif  // MCAGG_LDR_H_
