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

#include "mcagg/ldr.h"

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "mcagg/aggregate.h"
#include "mcagg/errors.h"
#include "mcagg/hdr.h"
#include "mcagg/sddp.h"
#include "mcagg/tree.h"
#include "toy_model.h"

namespace mcagg {
namespace {

using testing::ToyParams;

std::shared_ptr<const ScenarioTree> make_tree(std::shared_ptr<const MarkovChain> chain, int T) {
  return std::make_shared<const ScenarioTree>(build_tree(std::move(chain), T));
}

// Aggregated extensive form with every non-root state tied to a linear rule
// by equality rows. Rules are keyed as the decision rule kind prescribes.
double rule_restricted_optimum(const Msilp& m, const AggregationMap& agg, LdrKind kind) {
  ExtensiveLayout lay;
  MipProblem p = build_aggregated_extensive_form(m, agg, &lay);
  const ScenarioTree& tree = m.tree();
  const int k = m.dims().state;
  std::map<std::pair<int, int>, int> rule_col;
  for (int n = 0; n < tree.num_nodes(); ++n) {
    if (n == tree.root()) continue;
    std::vector<double> basis;
    if (kind == LdrKind::kHistory) {
      for (int v : path(tree, n)) {
        for (double r : m.data(v).basis_realization()) basis.push_back(r);
      }
    } else {
      basis = m.data(n).basis_realization();
    }
    basis.push_back(1.0);
    const int state = kind == LdrKind::kMarkov ? tree.node(n).mc_state : -1;
    auto [it, inserted] = rule_col.emplace(std::make_pair(tree.node(n).stage, state), 0);
    if (inserted) {
      it->second = p.lp.num_cols();
      for (size_t c = 0; c < k * basis.size(); ++c) p.add_column(0.0, -kInf, kInf, false);
    }
    for (int i = 0; i < k; ++i) {
      LpRow row;
      row.add(lay.state_col[n] + i, 1.0);
      for (size_t j = 0; j < basis.size(); ++j) {
        if (basis[j] != 0.0) row.add(it->second + i * static_cast<int>(basis.size()) + j, -basis[j]);
      }
      row.set_sense(Sense::kEqual, 0.0);
      p.lp.add_row(std::move(row));
    }
  }
  MipSolution sol = branch_and_cut(p);
  return sol.status == MipStatus::kOptimal ? sol.objective : kInf;
}

double aggregated_optimum(const Msilp& m, const AggregationMap& agg) {
  return branch_and_cut(build_aggregated_extensive_form(m, agg)).objective;
}

TEST(LdrTest, ParsesKinds) {
  EXPECT_EQ(parse_ldr_kind("LDR-TH"), LdrKind::kHistory);
  EXPECT_EQ(parse_ldr_kind("t"), LdrKind::kStage);
  EXPECT_EQ(parse_ldr_kind("ldr-m"), LdrKind::kMarkov);
  EXPECT_THROW(parse_ldr_kind("ldr-x"), InvalidArgument);
  EXPECT_STREQ(to_string(LdrKind::kHistory), "ldr-th");
}

TEST(LdrTest, RuleDimensions) {
  auto tree = make_tree(testing::two_state_chain(0.5, 0.2), 4);
  Msilp m = testing::toy_model(tree);
  AggregationMap agg = build_aggregation(*tree, {TransformKind::kMA, {}});
  const int l = static_cast<int>(m.data(1).basis_realization().size());
  LdrModel t = build_ldr_model(m, agg, {LdrKind::kStage, true});
  ASSERT_EQ(t.rules.size(), 3u);
  for (const LdrRule& r : t.rules) EXPECT_EQ(r.states * r.basis_size, m.dims().state * (l + 1));
  LdrModel mk = build_ldr_model(m, agg, {LdrKind::kMarkov, true});
  EXPECT_EQ(mk.rules.size(), 6u);
  LdrModel th = build_ldr_model(m, agg, {LdrKind::kHistory, false});
  for (const LdrRule& r : th.rules) EXPECT_EQ(r.basis_size, l * r.stage);
  EXPECT_EQ(th.num_rule_columns(), m.dims().state * l * (2 + 3 + 4));
  EXPECT_THROW(build_ldr_model(m, agg, {LdrKind::kHistory, true}, 10), Overflow);
}

TEST(LdrTest, RecourseCounts) {
  auto tree = make_tree(testing::two_state_chain(0.5, 0.2), 4);
  Msilp m = testing::toy_model(tree);
  for (TransformKind kind : {TransformKind::kHN, TransformKind::kMA, TransformKind::kMM}) {
    AggregationMap agg = build_aggregation(*tree, {kind, {}});
    const PolicyGraph pg = build_policy_graph(*tree, agg);
    for (LdrKind lk : {LdrKind::kStage, LdrKind::kMarkov}) {
      LdrModel model = build_ldr_model(m, agg, {lk, true});
      EXPECT_EQ(static_cast<int>(model.recourse.size()), pg.num_subproblems())
          << to_string(kind) << " " << to_string(lk);
    }
    LdrModel th = build_ldr_model(m, agg, {LdrKind::kHistory, true});
    EXPECT_EQ(static_cast<int>(th.recourse.size()), tree->num_nodes() - 1);
    EXPECT_EQ(th.cut_groups.size(), 6u);
    // Only local columns remain in the second stage.
    for (const LdrRecourse& r : th.recourse) EXPECT_EQ(r.lp.lp.num_cols(), m.dims().local);
  }
}

TEST(LdrTest, DeterministicChainMatchesExtensiveForm) {
  auto tree = make_tree(testing::singleton_chain(), 4);
  ToyParams tp;
  tp.demand = {5.0};
  Msilp m = testing::toy_model(tree, tp);
  AggregationMap agg = build_aggregation(*tree, {TransformKind::kFH, {}});
  const double ef = aggregated_optimum(m, agg);
  for (LdrKind lk : {LdrKind::kHistory, LdrKind::kStage, LdrKind::kMarkov}) {
    LdrResult r = benders_solve(build_ldr_model(m, agg, {lk, true}));
    ASSERT_EQ(r.mip.status, MipStatus::kOptimal);
    EXPECT_NEAR(r.mip.objective, ef, 1e-6) << to_string(lk);
  }
}

TEST(LdrTest, BendersMatchesRuleRestrictedExtensiveForm) {
  testing::Rand rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    auto tree = make_tree(testing::random_chain(rng, 3), 3);
    ToyParams tp;
    tp.build_cost = rng.uniform(1.0, 6.0);
    tp.unit_capacity = rng.integer(1, 4);
    tp.demand = {rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0, 6)};
    Msilp m = testing::toy_model(tree, tp);
    for (TransformKind tk : {TransformKind::kHN, TransformKind::kMA, TransformKind::kFH}) {
      AggregationMap agg = build_aggregation(*tree, {tk, {}});
      const double pa = aggregated_optimum(m, agg);
      double t_obj = 0.0, m_obj = 0.0;
      for (LdrKind lk : {LdrKind::kHistory, LdrKind::kStage, LdrKind::kMarkov}) {
        LdrResult r = benders_solve(build_ldr_model(m, agg, {lk, true}));
        ASSERT_EQ(r.mip.status, MipStatus::kOptimal);
        EXPECT_NEAR(r.mip.objective, rule_restricted_optimum(m, agg, lk), 1e-6)
            << "trial " << trial << " " << to_string(tk) << " " << to_string(lk);
        EXPECT_GE(r.mip.objective, pa - 1e-6);
        if (lk == LdrKind::kStage) t_obj = r.mip.objective;
        if (lk == LdrKind::kMarkov) m_obj = r.mip.objective;
      }
      EXPECT_LE(m_obj, t_obj + 1e-6);
    }
  }
}

TEST(LdrTest, ExtractedPolicyReproducesObjective) {
  auto tree = make_tree(testing::two_state_chain(0.4, 0.3), 3);
  ToyParams tp;
  tp.demand = {2.0, 7.0};
  Msilp m = testing::toy_model(tree, tp);
  AggregationMap agg = build_aggregation(*tree, {TransformKind::kMA, {}});
  for (LdrKind lk : {LdrKind::kHistory, LdrKind::kStage, LdrKind::kMarkov}) {
    LdrModel model = build_ldr_model(m, agg, {lk, true});
    LdrResult r = benders_solve(model);
    ASSERT_EQ(r.mip.status, MipStatus::kOptimal);
    LdrPolicy pol = extract_policy(m, agg, model, r.mip.x);
    EXPECT_NEAR(pol.state[tree->root()][0], r.mip.x[model.first_stage.state_col[tree->root()]],
                1e-12);
    // Plug states and integers into the aggregated extensive form.
    ExtensiveLayout lay;
    MipProblem ef = build_aggregated_extensive_form(m, agg, &lay);
    for (int n = 0; n < tree->num_nodes(); ++n) {
      for (int i = 0; i < m.dims().state; ++i) {
        ef.lp.col_lower[lay.state_col[n] + i] = pol.state[n][i];
        ef.lp.col_upper[lay.state_col[n] + i] = pol.state[n][i];
      }
    }
    for (int g = 0; g < agg.num_groups(); ++g) {
      ef.lp.col_lower[lay.group_col[g]] = std::round(pol.groups[g]);
      ef.lp.col_upper[lay.group_col[g]] = std::round(pol.groups[g]);
    }
    LpSolution sol = LpSolver(ef.lp).solve();
    ASSERT_EQ(sol.status, LpStatus::kOptimal) << to_string(lk);
    EXPECT_NEAR(sol.objective, r.mip.objective, 1e-6) << to_string(lk);
    if (lk == LdrKind::kMarkov) {
      for (int a = 0; a < tree->num_nodes(); ++a) {
        for (int b = 0; b < tree->num_nodes(); ++b) {
          if (tree->node(a).stage == tree->node(b).stage &&
              tree->node(a).mc_state == tree->node(b).mc_state &&
              agg.node_group[a] == agg.node_group[b]) {
            EXPECT_NEAR(pol.state[a][0], pol.state[b][0], 1e-12);
          }
        }
      }
    }
  }
}

TEST(LdrTest, HybridCutsUnderestimateRecourse) {
  HdrInstance inst = generate_instance(testing::small_hdr_config(2));
  auto tree = build_hdr_tree(inst);
  Msilp m = build_hdr_aggregated(inst, tree);
  AggregationMap agg = build_aggregation(*tree, {TransformKind::kMA, {}});
  LdrModel model = build_ldr_model(m, agg, {LdrKind::kMarkov, true});
  LdrResult r = benders_solve(model);
  ASSERT_EQ(r.mip.status, MipStatus::kOptimal);
  ASSERT_FALSE(r.cuts.empty());
  testing::Rand rng(8);
  for (const LdrCut& c : r.cuts) {
    if (c.cut.feasibility) continue;
    EXPECT_NEAR(c.cut.eval(c.cut.point), c.cut.value, 1e-6 * std::max(1.0, c.cut.value));
    for (int i = 0; i < 100; ++i) {
      // Perturb the generating point.
      std::vector<double> p = c.cut.point;
      for (double& v : p) v += rng.uniform(-5.0, 5.0) * (rng.chance(0.3) ? 1.0 : 0.0);
      const double q = recourse_value(model, c.group, p);
      if (std::isfinite(q)) {
        EXPECT_LE(c.cut.eval(p), q + 1e-6 * std::max(1.0, std::abs(q)));
      }
    }
  }
}

TEST(LdrTest, FeasibilityCutsWhenShortfallIsForbidden) {
  auto tree = make_tree(testing::two_state_chain(0.5, 0.5), 3);
  ToyParams tp;
  tp.allow_shortfall = false;
  tp.initial_capacity = 2.0;
  tp.demand = {1.0, 4.0};
  Msilp m = testing::toy_model(tree, tp);
  AggregationMap agg = build_aggregation(*tree, {TransformKind::kMA, {}});
  for (LdrKind lk : {LdrKind::kStage, LdrKind::kMarkov}) {
    LdrResult r = benders_solve(build_ldr_model(m, agg, {lk, true}));
    ASSERT_EQ(r.mip.status, MipStatus::kOptimal);
    EXPECT_GT(r.stats.feasibility_cuts, 0);
    EXPECT_NEAR(r.mip.objective, rule_restricted_optimum(m, agg, lk), 1e-6) << to_string(lk);
  }
}

TEST(LdrTest, ReliefSandwich) {
  for (std::uint64_t seed : {1, 4}) {
    HdrInstance inst = generate_instance(testing::small_hdr_config(seed));
    auto tree = build_hdr_tree(inst);
    Msilp m = build_hdr_aggregated(inst, tree);
    for (TransformKind tk : {TransformKind::kHN, TransformKind::kMA}) {
      AggregationMap agg = build_aggregation(*tree, {tk, {}});
      const double pa = aggregated_optimum(m, agg);
      const double tol = 1e-6 * std::max(1.0, std::abs(pa));
      const double t_obj = benders_solve(build_ldr_model(m, agg, {LdrKind::kStage, true})).mip.objective;
      const double m_obj = benders_solve(build_ldr_model(m, agg, {LdrKind::kMarkov, true})).mip.objective;
      const double th_obj =
          benders_solve(build_ldr_model(m, agg, {LdrKind::kHistory, true})).mip.objective;
      EXPECT_GE(m_obj, pa - tol);
      EXPECT_LE(m_obj, t_obj + tol);
      EXPECT_GE(th_obj, pa - tol);
      EXPECT_NEAR(m_obj, rule_restricted_optimum(m, agg, LdrKind::kMarkov), tol);
    }
  }
}

// Rule columns that act on the same directions used to produce spurious
// unbounded master relaxations on this instance.
TEST(LdrTest, MarkovRulesNeverWorseThanStageRules) {
  HdrConfig cfg = testing::small_hdr_config(1, 2, 5);
  cfg.costs.modality_per_unit = 5.0;
  HdrInstance inst = generate_instance(cfg);
  auto tree = build_hdr_tree(inst);
  Msilp m = build_hdr_aggregated(inst, tree);
  AggregationMap agg = build_aggregation(*tree, {TransformKind::kMM, {}});
  LdrResult t = benders_solve(build_ldr_model(m, agg, {LdrKind::kStage, true}));
  LdrResult mk = benders_solve(build_ldr_model(m, agg, {LdrKind::kMarkov, true}));
  ASSERT_EQ(t.mip.status, MipStatus::kOptimal);
  ASSERT_EQ(mk.mip.status, MipStatus::kOptimal);
  EXPECT_LE(mk.mip.objective, t.mip.objective + 1e-6 * std::abs(t.mip.objective));
}

}  // namespace
}  // namespace mcagg
