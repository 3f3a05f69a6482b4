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

// SDDP integrated into branch-and-cut for the aggregated formulation. The
// first stage holds every aggregated integer variable; each later stage is
// decomposed into one subproblem per policy-graph vertex.

#ifndef MCAGG_SDDP_H_
#define MCAGG_SDDP_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mcagg/aggregate.h"
#include "mcagg/lp.h"
#include "mcagg/mip.h"
#include "mcagg/model.h"

namespace mcagg {

// constant + sum of coef * p[index]
struct AffineForm {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  double eval(std::span<const double> p) const;
};

// LP whose row bounds are affine in a parameter vector. Open sides carry a
// constant of -kInf or kInf and no terms.
struct ParametricLp {
  LpProblem lp;
  int num_params = 0;
  std::vector<AffineForm> row_lower, row_upper;

  void add_row(LpRow row, AffineForm lower, AffineForm upper, std::string name = {});
  // Adds  row (sense) rhs.
  void add_row(LpRow row, Sense sense, AffineForm rhs, std::string name = {});
  std::pair<double, double> row_bounds(int i, std::span<const double> p) const;
  // Copy of lp with the row bounds at p.
  LpProblem at(std::span<const double> p) const;
};

// theta >= constant + coef'p for optimality cuts, 0 >= constant + coef'p for
// feasibility cuts.
struct Cut {
  bool feasibility = false;
  std::vector<double> coef;
  double constant = 0.0;
  std::vector<double> point;  // generating parameters
  double value = 0.0;         // subproblem value at point (optimality cuts)

  double eval(std::span<const double> p) const;
};

// Tight at p and valid for every parameter vector. Throws MissingDuals
// unless sol is optimal.
Cut make_optimality_cut(const ParametricLp& sub, std::span<const double> p,
                        const LpSolution& sol);
// Violated at p and satisfied wherever the subproblem is feasible. Throws
// MissingCertificate unless sol carries a valid Farkas ray.
Cut make_feasibility_cut(const ParametricLp& sub, std::span<const double> p,
                         const LpSolution& sol);

// Parameters of a subproblem: the parent's continuous state, the integer
// blocks of the ancestors (lag 1 is the parent), then the blocks of every
// group the subproblem or its descendants use.
struct ParamLayout {
  int state = 0;
  int block = 0;  // integer variables per group
  int lags = 0;
  std::vector<int> groups;  // sorted

  int size() const { return state + block * (lags + static_cast<int>(groups.size())); }
  int lag_offset(int k) const { return state + block * (k - 1); }
  int group_offset(int index) const { return state + block * (lags + index); }
  // Index of g in groups or -1.
  int find_group(int g) const;
};

struct SddpConfig {
  double epsilon = 1e-7;  // relative cut violation threshold
  int samples = 0;        // paths per round; 0 selects min(20, leaves)
  bool exact = true;
  int max_rounds = 3;     // rounds per call when not exact
  std::uint64_t seed = 1;
  std::int64_t max_passes = 1'000'000;
  MipOptions mip;
};

struct SddpStats {
  std::int64_t subroutine_calls = 0;
  std::int64_t rounds = 0;
  std::int64_t forward_solves = 0;
  std::int64_t optimality_cuts = 0;
  std::int64_t feasibility_cuts = 0;
  std::int64_t master_cuts = 0;
};

struct MasterLayout {
  ExtensiveLayout first_stage;      // groups and root columns
  std::vector<int> child_subs;      // stage-2 subproblems
  std::vector<int> theta_col;       // one per child_subs entry
};

class SddpEngine {
 public:
  SddpEngine(const Msilp& m, const AggregationMap& agg, SddpConfig config = {});
  ~SddpEngine();
  SddpEngine(const SddpEngine&) = delete;
  SddpEngine& operator=(const SddpEngine&) = delete;

  const Msilp& model() const;
  const AggregationMap& aggregation() const;
  const PolicyGraph& graph() const;
  const SddpConfig& config() const;
  SddpConfig& mutable_config();
  const ParamLayout& layout(int sub) const;
  const ParametricLp& subproblem(int sub) const;
  const std::vector<Cut>& cuts(int sub) const;
  const SddpStats& stats() const;

  // First-stage problem with one epigraph column per stage-2 subproblem and
  // the master-level cuts found so far.
  MipProblem master() const;
  const MasterLayout& master_layout() const;
  // Group values read from a master point, num_groups x block.
  std::vector<double> group_values(std::span<const double> master_x) const;

  // Parameters of node n's subproblem for given parent state and group values.
  std::vector<double> node_params(int n, std::span<const double> parent_state,
                                  std::span<const double> groups) const;
  // Current outer approximation of subproblem sub at p.
  LpSolution solve_subproblem(int sub, std::span<const double> p);

  // SDDP run for the stage-2 subproblem child_sub at a master point. Returns
  // a violated master row, or nothing once convergence is certified (exact)
  // or the round budget is spent.
  std::optional<LpRow> subroutine(std::span<const double> master_x, int child_sub);
  // Runs subroutine for every stage-2 subproblem.
  std::vector<LpRow> separate(std::span<const double> master_x);

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

struct SddpResult {
  MipSolution mip;
  std::vector<double> groups;  // z values per group, num_groups x block
  SddpStats stats;
  double seconds = 0.0;
};

// Branch-and-cut on the master with SDDP separation. With fixed set, the
// group columns are fixed to those values first.
SddpResult run_sddp_branch_and_cut(SddpEngine& engine,
                                   const std::vector<double>* fixed_groups = nullptr);
// Exact decomposition; the objective matches the aggregated extensive form.
SddpResult solve_exact(const Msilp& m, const AggregationMap& agg, SddpConfig config = {});
// Relaxed termination: epsilon 0.1 and three rounds by default. The master
// objective is a valid lower bound.
SddpConfig lower_bound_config(SddpConfig base = {});
SddpResult solve_lower_bound(const Msilp& m, const AggregationMap& agg,
                             SddpConfig config = lower_bound_config());
// Exact expected cost of fixed group values. Throws InfeasiblePolicy.
double evaluate_policy(const Msilp& m, const AggregationMap& agg,
                       const std::vector<double>& groups, SddpConfig config = {});

}  // namespace mcagg

#endif  // MCAGG_SDDP_H_
