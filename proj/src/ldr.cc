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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "mcagg/errors.h"
#include "mcagg/tree.h"

namespace mcagg {

const char* to_string(LdrKind kind) {
  switch (kind) {
    case LdrKind::kHistory:
      return "ldr-th";
    case LdrKind::kStage:
      return "ldr-t";
    case LdrKind::kMarkov:
      return "ldr-m";
  }
  return "?";
}

LdrKind parse_ldr_kind(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s.rfind("ldr-", 0) == 0) s = s.substr(4);
  if (s == "th") return LdrKind::kHistory;
  if (s == "t") return LdrKind::kStage;
  if (s == "m") return LdrKind::kMarkov;
  throw InvalidArgument("unknown decision rule: " + name);
}

int LdrModel::num_rule_columns() const {
  int total = 0;
  for (const LdrRule& r : rules) total += r.states * r.basis_size;
  return total;
}

namespace {

using Expr = std::map<int, double>;

void add_scaled(Expr& e, const Expr& other, double scale) {
  for (const auto& [c, v] : other) e[c] += scale * v;
}

// Sum of a(i, :) * x over the expressions of the columns of a.
Expr row_times(const SparseMatrix& a, int i, const std::vector<Expr>& x) {
  Expr e;
  if (a.empty()) return e;
  for (int k = a.row_begin(i); k < a.row_end(i); ++k) add_scaled(e, x[a.index(k)], a.value(k));
  return e;
}

// Same for a block of consecutive columns starting at col.
Expr row_times_cols(const SparseMatrix& a, int i, int col) {
  Expr e;
  if (a.empty()) return e;
  for (int k = a.row_begin(i); k < a.row_end(i); ++k) e[col + a.index(k)] += a.value(k);
  return e;
}

LpRow to_row(const Expr& e) {
  LpRow row;
  for (const auto& [c, v] : e) {
    if (std::abs(v) >= 1e-12) row.add(c, v);
  }
  return row;
}

bool row_has_entries(const SparseMatrix& a, int i) {
  return !a.empty() && a.row_end(i) > a.row_begin(i);
}

}  // namespace

LdrModel build_ldr_model(const Msilp& m, const AggregationMap& agg, const LdrVariant& variant,
                         std::int64_t cap) {
  if (static_cast<int>(agg.node_group.size()) != m.tree().num_nodes()) {
    throw DimensionMismatch("aggregation map does not match the tree");
  }
  const ScenarioTree& tree = m.tree();
  const Dims d = m.dims();
  const int root = tree.root();
  LdrModel out;
  out.variant = variant;
  out.master = build_first_stage_problem(m, agg, &out.first_stage);
  MipProblem& mp = out.master;
  const ExtensiveLayout& fs = out.first_stage;

  // Basis vectors.
  out.basis.assign(tree.num_nodes(), {});
  out.node_rule.assign(tree.num_nodes(), -1);
  for (int n = 0; n < tree.num_nodes(); ++n) {
    if (n == root) continue;
    std::vector<double>& b = out.basis[n];
    if (variant.kind == LdrKind::kHistory) {
      for (int v : path(tree, n)) {
        const std::vector<double> r = m.data(v).basis_realization();
        b.insert(b.end(), r.begin(), r.end());
      }
    } else {
      b = m.data(n).basis_realization();
    }
    if (variant.intercept) b.push_back(1.0);
  }

  // One rule per stage, or per stage and chain state.
  std::map<std::pair<int, int>, int> rule_index;
  std::int64_t rule_cols = 0;
  for (int n = 0; n < tree.num_nodes(); ++n) {
    if (n == root) continue;
    const TreeNode& node = tree.node(n);
    const int state = variant.kind == LdrKind::kMarkov ? node.mc_state : -1;
    auto [it, inserted] = rule_index.emplace(std::make_pair(node.stage, state),
                                             static_cast<int>(out.rules.size()));
    if (inserted) {
      LdrRule r;
      r.stage = node.stage;
      r.mc_state = state;
      r.states = d.state;
      r.basis_size = static_cast<int>(out.basis[n].size());
      out.rules.push_back(r);
      rule_cols += static_cast<std::int64_t>(d.state) * r.basis_size;
    } else if (out.rules[it->second].basis_size != static_cast<int>(out.basis[n].size())) {
      throw InvalidArgument(fmt::format("basis length varies within stage {}", node.stage));
    }
    out.node_rule[n] = it->second;
  }
  if (mp.lp.num_cols() + rule_cols > cap) {
    throw Overflow(fmt::format("decision rule model needs {} columns, cap is {}",
                               mp.lp.num_cols() + rule_cols, cap));
  }
  for (LdrRule& r : out.rules) {
    r.first_col = mp.lp.num_cols();
    for (int i = 0; i < d.state; ++i) {
      for (int j = 0; j < r.basis_size; ++j) {
        mp.add_column(0.0, -kInf, kInf, false,
                      r.mc_state < 0 ? fmt::format("rule_{}_{}_{}", r.stage, i, j)
                                     : fmt::format("rule_{}_{}_{}_{}", r.stage, r.mc_state, i, j));
      }
    }
  }

  // State expressions over the first-stage columns.
  std::vector<std::vector<Expr>> x(tree.num_nodes(), std::vector<Expr>(d.state));
  for (int n = 0; n < tree.num_nodes(); ++n) {
    for (int i = 0; i < d.state; ++i) {
      if (n == root) {
        x[n][i][fs.state_col[root] + i] = 1.0;
        continue;
      }
      const LdrRule& r = out.rules[out.node_rule[n]];
      for (int j = 0; j < r.basis_size; ++j) {
        if (out.basis[n][j] != 0.0) x[n][i][r.col(i, j)] += out.basis[n][j];
      }
    }
  }

  // First-stage rows of non-root nodes, merged when identical.
  std::set<std::tuple<std::vector<std::pair<int, double>>, double, double>> seen;
  auto add_first_stage = [&](const Expr& e, double lower, double upper, const std::string& name) {
    LpRow row = to_row(e);
    if (row.index.empty()) {
      if (lower > 1e-9 || upper < -1e-9) {
        throw InfeasibleModel("a decision rule row without terms is violated: " + name);
      }
      return;
    }
    std::vector<std::pair<int, double>> key;
    for (size_t k = 0; k < row.index.size(); ++k) key.emplace_back(row.index[k], row.value[k]);
    if (!seen.emplace(std::move(key), lower, upper).second) return;
    row.lower = lower;
    row.upper = upper;
    mp.lp.add_row(std::move(row), name);
  };
  auto sense_bounds = [](Sense s, double rhs) {
    LpRow tmp;
    tmp.set_sense(s, rhs);
    return std::make_pair(tmp.lower, tmp.upper);
  };

  for (int n = 0; n < tree.num_nodes(); ++n) {
    if (n == root) continue;
    const NodeData& nd = m.data(n);
    const TreeNode& node = tree.node(n);
    const double p = node.p;
    for (int i = 0; i < d.state; ++i) {
      // State costs move onto the rule columns.
      if (nd.state_cost[i] != 0.0) {
        for (const auto& [c, v] : x[n][i]) mp.lp.cost[c] += p * nd.state_cost[i] * v;
      }
      if (std::isfinite(nd.state_lower[i]) || std::isfinite(nd.state_upper[i])) {
        add_first_stage(x[n][i], nd.state_lower[i], nd.state_upper[i],
                        fmt::format("xbound_{}_{}", n, i));
      }
    }
    for (int i = 0; i < nd.num_state_rows(); ++i) {
      Expr e = row_times(nd.state_own, i, x[n]);
      add_scaled(e, row_times(nd.state_parent, i, x[node.parent]), -1.0);
      auto [lo, hi] = sense_bounds(nd.state_sense[i], nd.state_rhs[i]);
      add_first_stage(e, lo, hi, fmt::format("state_{}_{}", n, i));
    }
  }

  // Linking rows: into the first stage without locals, otherwise recourse.
  std::map<std::tuple<int, const NodeData*, std::vector<double>>, int> recourse_index;
  std::map<std::pair<int, int>, int> group_index;
  const PolicyGraph pg = build_policy_graph(tree, agg);
  const int num_params = mp.lp.num_cols();
  out.node_recourse.assign(tree.num_nodes(), -1);
  for (int n = 0; n < tree.num_nodes(); ++n) {
    if (n == root) continue;
    const NodeData& nd = m.data(n);
    const TreeNode& node = tree.node(n);
    const int own = fs.group_col[agg.node_group[n]];
    ParametricLp lp;
    lp.num_params = num_params;
    std::vector<double> signature;
    for (int j = 0; j < d.local; ++j) {
      lp.lp.add_column(nd.local_cost[j], nd.local_lower[j], nd.local_upper[j],
                       j < static_cast<int>(m.local_names.size()) ? m.local_names[j]
                                                                  : fmt::format("y{}", j));
    }
    for (int i = 0; i < nd.num_link_rows(); ++i) {
      // a_state x + a_int z_own - a_parent x_parent - sum lag z_anc
      Expr e = row_times(nd.link_state, i, x[n]);
      add_scaled(e, row_times_cols(nd.link_int, i, own), 1.0);
      add_scaled(e, row_times(nd.link_parent, i, x[node.parent]), -1.0);
      int anc = node.parent;
      for (const SparseMatrix& lag : nd.link_lag) {
        if (anc < 0) break;
        add_scaled(e, row_times_cols(lag, i, fs.group_col[agg.node_group[anc]]), -1.0);
        anc = tree.node(anc).parent;
      }
      if (!row_has_entries(nd.link_local, i)) {
        ++out.moved_rows;
        auto [lo, hi] = sense_bounds(nd.link_sense[i], nd.link_rhs[i]);
        add_first_stage(e, lo, hi, fmt::format("link_{}_{}", n, i));
        continue;
      }
      LpRow row;
      for (int k = nd.link_local.row_begin(i); k < nd.link_local.row_end(i); ++k) {
        row.add(nd.link_local.index(k), nd.link_local.value(k));
      }
      AffineForm rhs{nd.link_rhs[i], {}};
      for (const auto& [c, v] : e) {
        if (std::abs(v) >= 1e-12) rhs.terms.emplace_back(c, -v);
      }
      signature.push_back(static_cast<double>(i));
      signature.push_back(rhs.constant);
      for (const auto& [c, v] : rhs.terms) {
        signature.push_back(c);
        signature.push_back(v);
      }
      lp.add_row(std::move(row), nd.link_sense[i], std::move(rhs), fmt::format("link{}", i));
    }
    const int key_sub = variant.kind == LdrKind::kHistory ? -1 - n : pg.node_sub[n];
    auto [it, inserted] = recourse_index.emplace(
        std::make_tuple(key_sub, m.data_ptr(n).get(), std::move(signature)),
        static_cast<int>(out.recourse.size()));
    if (inserted) {
      LdrRecourse r;
      r.lp = std::move(lp);
      group_index.emplace(std::make_pair(node.stage, node.mc_state), 0);
      out.recourse.push_back(std::move(r));
    }
    LdrRecourse& r = out.recourse[it->second];
    r.nodes.push_back(n);
    r.probability += node.p;
    out.node_recourse[n] = it->second;
  }

  // Value columns per stage and chain state, in that order.
  int next = 0;
  for (auto& [key, index] : group_index) index = next++;
  out.cut_groups.resize(group_index.size());
  for (const auto& [key, index] : group_index) {
    out.cut_groups[index].stage = key.first;
    out.cut_groups[index].mc_state = key.second;
  }
  std::vector<double> mass(out.cut_groups.size(), 0.0);
  for (int r = 0; r < static_cast<int>(out.recourse.size()); ++r) {
    const TreeNode& node = tree.node(out.recourse[r].nodes.front());
    const int g = group_index.at({node.stage, node.mc_state});
    out.recourse[r].cut_group = g;
    out.cut_groups[g].recourse.push_back(r);
    mass[g] += out.recourse[r].probability;
  }
  for (size_t g = 0; g < out.cut_groups.size(); ++g) {
    const double lb = std::isfinite(m.value_lower_bound) ? m.value_lower_bound * mass[g] : -kInf;
    out.cut_groups[g].theta_col =
        mp.add_column(1.0, lb, kInf, false,
                      fmt::format("theta_{}_{}", out.cut_groups[g].stage, out.cut_groups[g].mc_state));
  }
  return out;
}

namespace {

class BendersOracle : public CutOracle {
 public:
  BendersOracle(const LdrModel& model, double epsilon, const LpOptions& lp, LdrResult& result)
      : model_(model), epsilon_(epsilon), result_(result) {
    for (const LdrRecourse& r : model.recourse) {
      solvers_.push_back(std::make_unique<LpSolver>(r.lp.lp, lp));
    }
  }

  std::vector<LpRow> separate(std::span<const double> x) override {
    ++result_.stats.oracle_calls;
    const int num_params = model_.recourse.empty() ? 0 : model_.recourse.front().lp.num_params;
    const std::span<const double> p = x.first(num_params);
    for (int g = 0; g < static_cast<int>(model_.cut_groups.size()); ++g) {
      const LdrCutGroup& group = model_.cut_groups[g];
      Cut total;
      total.coef.assign(num_params, 0.0);
      double value = 0.0;
      for (int r : group.recourse) {
        const LdrRecourse& rec = model_.recourse[r];
        LpSolver& solver = *solvers_[r];
        for (int i = 0; i < rec.lp.lp.num_rows(); ++i) {
          auto [lo, hi] = rec.lp.row_bounds(i, p);
          solver.set_row_bounds(i, lo, hi);
        }
        ++result_.stats.recourse_solves;
        const LpSolution sol = solver.solve();
        if (sol.status == LpStatus::kInfeasible) {
          Cut cut = make_feasibility_cut(rec.lp, p, sol);
          ++result_.stats.feasibility_cuts;
          LpRow row;
          for (int j = 0; j < num_params; ++j) {
            if (cut.coef[j] != 0.0) row.add(j, -cut.coef[j]);
          }
          row.lower = cut.constant;
          result_.cuts.push_back({g, std::move(cut)});
          return {row};
        }
        if (sol.status != LpStatus::kOptimal) {
          throw NumericalFailure(fmt::format("recourse problem {} is {}", r, to_string(sol.status)));
        }
        const Cut cut = make_optimality_cut(rec.lp, p, sol);
        for (int j = 0; j < num_params; ++j) total.coef[j] += rec.probability * cut.coef[j];
        total.constant += rec.probability * cut.constant;
        value += rec.probability * sol.objective;
      }
      const double theta = x[group.theta_col];
      if (value - theta > epsilon_ * std::abs(value) + 1e-8) {
        ++result_.stats.optimality_cuts;
        total.point.assign(p.begin(), p.end());
        total.value = value;
        LpRow row;
        row.add(group.theta_col, 1.0);
        for (int j = 0; j < num_params; ++j) {
          if (total.coef[j] != 0.0) row.add(j, -total.coef[j]);
        }
        row.lower = total.constant;
        result_.cuts.push_back({g, std::move(total)});
        return {row};
      }
    }
    return {};
  }

 private:
  const LdrModel& model_;
  double epsilon_;
  LdrResult& result_;
  std::vector<std::unique_ptr<LpSolver>> solvers_;
};

}  // namespace

LdrResult benders_solve(const LdrModel& model, double epsilon, const MipOptions& options) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const auto start = std::chrono::steady_clock::now();
  LdrResult result;
  BendersOracle oracle(model, epsilon, options.lp, result);
  result.mip = branch_and_cut(model.master, model.recourse.empty() ? nullptr : &oracle, options);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.mip.status == MipStatus::kInfeasible) {
    throw InfeasibleModel("the decision rule model has no feasible first stage");
  }
  return result;
}

double recourse_value(const LdrModel& model, int group, std::span<const double> first_stage) {
  double total = 0.0;
  for (int r : model.cut_groups.at(group).recourse) {
    const LdrRecourse& rec = model.recourse[r];
    const LpSolution sol = LpSolver(rec.lp.at(first_stage.first(rec.lp.num_params))).solve();
    if (sol.status == LpStatus::kInfeasible) return kInf;
    total += rec.probability * sol.objective;
  }
  return total;
}

LdrPolicy extract_policy(const Msilp& m, const AggregationMap& agg, const LdrModel& model,
                         std::span<const double> first_stage) {
  const ScenarioTree& tree = m.tree();
  const Dims d = m.dims();
  const int root = tree.root();
  LdrPolicy out;
  out.state.assign(tree.num_nodes(), std::vector<double>(d.state, 0.0));
  for (int n = 0; n < tree.num_nodes(); ++n) {
    for (int i = 0; i < d.state; ++i) {
      if (n == root) {
        out.state[n][i] = first_stage[model.first_stage.state_col[root] + i];
        continue;
      }
      const LdrRule& r = model.rules[model.node_rule[n]];
      double v = 0.0;
      for (int j = 0; j < r.basis_size; ++j) v += model.basis[n][j] * first_stage[r.col(i, j)];
      out.state[n][i] = v;
    }
  }
  out.groups.assign(static_cast<size_t>(agg.num_groups()) * d.integer, 0.0);
  for (int g = 0; g < agg.num_groups(); ++g) {
    for (int l = 0; l < d.integer; ++l) {
      out.groups[g * d.integer + l] = first_stage[model.first_stage.group_col[g] + l];
    }
  }
  for (const LdrRule& r : model.rules) {
    for (int c = 0; c < d.state * r.basis_size; ++c) out.rules.push_back(first_stage[r.first_col + c]);
  }
  return out;
}

}  // namespace mcagg
