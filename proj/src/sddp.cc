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

#include "mcagg/sddp.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include <fmt/format.h>

#include "mcagg/errors.h"

namespace mcagg {

double AffineForm::eval(std::span<const double> p) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * p[i];
  return v;
}

void ParametricLp::add_row(LpRow row, AffineForm lower, AffineForm upper, std::string name) {
  const std::vector<double> zero(num_params, 0.0);
  row.lower = lower.eval(zero);
  row.upper = upper.eval(zero);
  lp.add_row(std::move(row), std::move(name));
  row_lower.push_back(std::move(lower));
  row_upper.push_back(std::move(upper));
}

void ParametricLp::add_row(LpRow row, Sense sense, AffineForm rhs, std::string name) {
  AffineForm open_low{-kInf, {}}, open_high{kInf, {}};
  switch (sense) {
    case Sense::kGreaterEqual:
      add_row(std::move(row), std::move(rhs), open_high, std::move(name));
      break;
    case Sense::kLessEqual:
      add_row(std::move(row), open_low, std::move(rhs), std::move(name));
      break;
    case Sense::kEqual: {
      AffineForm copy = rhs;
      add_row(std::move(row), std::move(copy), std::move(rhs), std::move(name));
      break;
    }
  }
}

std::pair<double, double> ParametricLp::row_bounds(int i, std::span<const double> p) const {
  return {row_lower[i].eval(p), row_upper[i].eval(p)};
}

LpProblem ParametricLp::at(std::span<const double> p) const {
  LpProblem out = lp;
  for (int i = 0; i < out.num_rows(); ++i) {
    std::tie(out.rows[i].lower, out.rows[i].upper) = row_bounds(i, p);
  }
  return out;
}

double Cut::eval(std::span<const double> p) const {
  double v = constant;
  for (size_t j = 0; j < coef.size(); ++j) v += coef[j] * p[j];
  return v;
}

namespace {

// Adds y * d(side)/dp to coef and returns y times the constant of the side
// selected by the sign of y.
double accumulate_side(const ParametricLp& sub, int i, double y, std::vector<double>& coef) {
  const AffineForm& form = y > 0 ? sub.row_lower[i] : sub.row_upper[i];
  if (!std::isfinite(form.constant)) return 0.0;
  for (const auto& [j, c] : form.terms) coef[j] += y * c;
  return y * form.constant;
}

}  // namespace

Cut make_optimality_cut(const ParametricLp& sub, std::span<const double> p,
                        const LpSolution& sol) {
  if (sol.status != LpStatus::kOptimal ||
      static_cast<int>(sol.dual.size()) != sub.lp.num_rows()) {
    throw MissingDuals("optimality cut needs an optimal solve");
  }
  Cut cut;
  cut.coef.assign(sub.num_params, 0.0);
  for (int i = 0; i < sub.lp.num_rows(); ++i) {
    if (sol.dual[i] != 0.0) accumulate_side(sub, i, sol.dual[i], cut.coef);
  }
  cut.point.assign(p.begin(), p.end());
  cut.value = sol.objective;
  double at_point = 0.0;
  for (int j = 0; j < sub.num_params; ++j) at_point += cut.coef[j] * p[j];
  cut.constant = sol.objective - at_point;
  return cut;
}

Cut make_feasibility_cut(const ParametricLp& sub, std::span<const double> p,
                         const LpSolution& sol) {
  if (sol.status != LpStatus::kInfeasible || sol.farkas_ray.empty()) {
    throw MissingCertificate("feasibility cut needs a Farkas ray");
  }
  const LpProblem inst = sub.at(p);
  const FarkasCheck check = check_farkas(inst, sol.farkas_ray);
  if (!check.valid) throw MissingCertificate("Farkas ray does not certify infeasibility");
  Cut cut;
  cut.feasibility = true;
  cut.coef.assign(sub.num_params, 0.0);
  double constant = 0.0;
  for (int i = 0; i < sub.lp.num_rows(); ++i) {
    if (sol.farkas_ray[i] != 0.0) constant += accumulate_side(sub, i, sol.farkas_ray[i], cut.coef);
  }
  cut.constant = constant - check.column_support;
  cut.point.assign(p.begin(), p.end());
  return cut;
}

int ParamLayout::find_group(int g) const {
  auto it = std::lower_bound(groups.begin(), groups.end(), g);
  return it != groups.end() && *it == g ? static_cast<int>(it - groups.begin()) : -1;
}

namespace {

struct ChildLink {
  int sub = 0;
  double prob = 0.0;
  int theta_col = 0;
  // Child parameter index -> own parameter index, or -1 - j for state column j.
  std::vector<int> param_map;
  size_t synced = 0;  // cuts of the child already present as rows
};

struct Subproblem {
  ParamLayout layout;
  ParametricLp lp;
  std::unique_ptr<LpSolver> solver;
  std::vector<ChildLink> children;
  std::vector<Cut> pool;
};

struct StageSolve {
  int node = 0;
  int sub = 0;
  std::vector<double> params;
  LpSolution sol;
};

}  // namespace

class SddpEngine::Impl {
 public:
  Impl(const Msilp& m, const AggregationMap& agg, SddpConfig config)
      : m_(m), agg_(agg), cfg_(config), rng_(config.seed) {
    if (!(cfg_.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (cfg_.samples < 0 || cfg_.max_rounds < 1) throw InvalidArgument("invalid SDDP budget");
    pg_ = build_policy_graph(m.tree(), agg);
    block_ = m.dims().integer;
    build_layouts();
    for (int s = 0; s < pg_.num_subproblems(); ++s) build_subproblem(s);
    build_master();
  }

  const Msilp& m_;
  const AggregationMap& agg_;
  SddpConfig cfg_;
  PolicyGraph pg_;
  int block_ = 0;
  std::vector<Subproblem> subs_;
  SddpStats stats_;
  std::mt19937_64 rng_;

  MipProblem master_;
  MasterLayout master_layout_;
  std::vector<LpRow> master_cuts_;
  std::vector<std::vector<int>> leaves_;  // per master child

  int theta_index(int parent_sub, int child_sub) const {
    const auto& ch = subs_[parent_sub].children;
    for (size_t i = 0; i < ch.size(); ++i) {
      if (ch[i].sub == child_sub) return ch[i].theta_col;
    }
    throw InvalidArgument("subproblem is not a child");
  }

  void build_layouts() {
    const ScenarioTree& tree = m_.tree();
    subs_.resize(pg_.num_subproblems());
    const int T = tree.stages();
    for (int t = T; t >= 2; --t) {
      for (int s = pg_.stage_begin[t]; s < pg_.stage_begin[t + 1]; ++s) {
        ParamLayout& lay = subs_[s].layout;
        lay.state = m_.dims().state;
        lay.block = block_;
        lay.lags = std::min(t - 1, m_.max_lag());
        std::set<int> groups = {pg_.subs[s].group};
        for (const auto& [c, p] : pg_.subs[s].children) {
          groups.insert(subs_[c].layout.groups.begin(), subs_[c].layout.groups.end());
        }
        lay.groups.assign(groups.begin(), groups.end());
      }
    }
  }

  // Maps the parameters of child c into those of parent s.
  std::vector<int> map_child(int s, int c) const {
    const ParamLayout& pl = subs_[s].layout;
    const ParamLayout& cl = subs_[c].layout;
    std::vector<int> map(cl.size());
    for (int j = 0; j < cl.state; ++j) map[j] = -1 - j;
    const int own = pl.group_offset(pl.find_group(pg_.subs[s].group));
    for (int k = 1; k <= cl.lags; ++k) {
      for (int l = 0; l < block_; ++l) {
        map[cl.lag_offset(k) + l] = k == 1 ? own + l : pl.lag_offset(k - 1) + l;
      }
    }
    for (size_t i = 0; i < cl.groups.size(); ++i) {
      const int at = pl.find_group(cl.groups[i]);
      for (int l = 0; l < block_; ++l) map[cl.group_offset(i) + l] = pl.group_offset(at) + l;
    }
    return map;
  }

  void build_subproblem(int s) {
    const PolicyGraph::Subproblem& info = pg_.subs[s];
    if (info.stage < 2) return;
    Subproblem& sp = subs_[s];
    const NodeData& nd = m_.data(info.nodes.front());
    const Dims& d = m_.dims();
    const ParamLayout& lay = sp.layout;
    ParametricLp& plp = sp.lp;
    plp.num_params = lay.size();
    for (int j = 0; j < d.state; ++j) {
      plp.lp.add_column(nd.state_cost[j], nd.state_lower[j], nd.state_upper[j],
                        j < static_cast<int>(m_.state_names.size()) ? m_.state_names[j]
                                                                    : fmt::format("x{}", j));
    }
    for (int j = 0; j < d.local; ++j) {
      plp.lp.add_column(nd.local_cost[j], nd.local_lower[j], nd.local_upper[j],
                        j < static_cast<int>(m_.local_names.size()) ? m_.local_names[j]
                                                                    : fmt::format("y{}", j));
    }
    for (const auto& [c, p] : info.children) {
      ChildLink link;
      link.sub = c;
      link.prob = p;
      link.theta_col = plp.lp.add_column(p, m_.value_lower_bound, kInf, fmt::format("theta{}", c));
      sp.children.push_back(std::move(link));
    }
    for (ChildLink& link : sp.children) link.param_map = map_child(s, link.sub);

    for (int i = 0; i < nd.num_state_rows(); ++i) {
      LpRow row;
      if (!nd.state_own.empty()) {
        for (int k = nd.state_own.row_begin(i); k < nd.state_own.row_end(i); ++k) {
          row.add(nd.state_own.index(k), nd.state_own.value(k));
        }
      }
      AffineForm rhs{nd.state_rhs[i], {}};
      if (!nd.state_parent.empty()) {
        for (int k = nd.state_parent.row_begin(i); k < nd.state_parent.row_end(i); ++k) {
          rhs.terms.emplace_back(nd.state_parent.index(k), nd.state_parent.value(k));
        }
      }
      plp.add_row(std::move(row), nd.state_sense[i], std::move(rhs), fmt::format("state{}", i));
    }
    const int own = lay.group_offset(lay.find_group(info.group));
    for (int i = 0; i < nd.num_link_rows(); ++i) {
      LpRow row;
      auto add_lhs = [&](const SparseMatrix& a, int offset) {
        if (a.empty()) return;
        for (int k = a.row_begin(i); k < a.row_end(i); ++k) row.add(offset + a.index(k), a.value(k));
      };
      add_lhs(nd.link_state, 0);
      add_lhs(nd.link_local, d.state);
      AffineForm rhs{nd.link_rhs[i], {}};
      auto add_rhs = [&](const SparseMatrix& a, int offset, double sign) {
        if (a.empty()) return;
        for (int k = a.row_begin(i); k < a.row_end(i); ++k) {
          rhs.terms.emplace_back(offset + a.index(k), sign * a.value(k));
        }
      };
      add_rhs(nd.link_parent, 0, 1.0);
      for (size_t k = 0; k < nd.link_lag.size(); ++k) {
        if (nd.link_lag[k].empty()) continue;
        if (static_cast<int>(k) + 1 > lay.lags) throw InvalidArgument("lag beyond the root");
        add_rhs(nd.link_lag[k], lay.lag_offset(static_cast<int>(k) + 1), 1.0);
      }
      add_rhs(nd.link_int, own, -1.0);
      plp.add_row(std::move(row), nd.link_sense[i], std::move(rhs), fmt::format("link{}", i));
    }
    sp.solver = std::make_unique<LpSolver>(plp.lp, cfg_.mip.lp);
  }

  void build_master() {
    const ScenarioTree& tree = m_.tree();
    master_ = build_first_stage_problem(m_, agg_, &master_layout_.first_stage);
    for (int s = pg_.stage_begin[2]; s < pg_.stage_begin[std::min(3, tree.stages() + 1)]; ++s) {
      if (tree.stages() < 2) break;
      const int n = pg_.subs[s].nodes.front();
      const double p = tree.node(n).p_cond;
      master_layout_.child_subs.push_back(s);
      master_layout_.theta_col.push_back(
          master_.add_column(p, m_.value_lower_bound, kInf, false, fmt::format("theta{}", s)));
      std::vector<int> leaves;
      collect_leaves(n, leaves);
      leaves_.push_back(std::move(leaves));
    }
  }

  void collect_leaves(int n, std::vector<int>& out) const {
    const TreeNode& node = m_.tree().node(n);
    if (node.num_children == 0) {
      out.push_back(n);
      return;
    }
    for (int c = node.first_child; c < node.first_child + node.num_children; ++c) {
      collect_leaves(c, out);
    }
  }

  std::vector<double> group_values(std::span<const double> x) const {
    std::vector<double> z(static_cast<size_t>(agg_.num_groups()) * block_);
    for (int g = 0; g < agg_.num_groups(); ++g) {
      for (int l = 0; l < block_; ++l) {
        z[g * block_ + l] = x[master_layout_.first_stage.group_col[g] + l];
      }
    }
    return z;
  }

  std::vector<double> node_params(int n, std::span<const double> parent_state,
                                  std::span<const double> z) const {
    const int s = pg_.node_sub.at(n);
    if (s < 0) throw InvalidArgument("the root has no subproblem");
    const ParamLayout& lay = subs_[s].layout;
    std::vector<double> p(lay.size());
    std::copy(parent_state.begin(), parent_state.begin() + lay.state, p.begin());
    int anc = m_.tree().node(n).parent;
    for (int k = 1; k <= lay.lags; ++k) {
      const int g = agg_.node_group[anc];
      for (int l = 0; l < block_; ++l) p[lay.lag_offset(k) + l] = z[g * block_ + l];
      anc = m_.tree().node(anc).parent;
    }
    for (size_t i = 0; i < lay.groups.size(); ++i) {
      const int g = lay.groups[i];
      for (int l = 0; l < block_; ++l) p[lay.group_offset(i) + l] = z[g * block_ + l];
    }
    return p;
  }

  // Appends rows for cuts of the children that the LP does not have yet.
  void sync_cuts(int s) {
    Subproblem& sp = subs_[s];
    std::vector<LpRow> fresh;
    for (ChildLink& link : sp.children) {
      const std::vector<Cut>& pool = subs_[link.sub].pool;
      for (; link.synced < pool.size(); ++link.synced) {
        const Cut& cut = pool[link.synced];
        LpRow row;
        if (!cut.feasibility) row.add(link.theta_col, 1.0);
        AffineForm rhs{cut.constant, {}};
        for (size_t j = 0; j < cut.coef.size(); ++j) {
          const double c = cut.coef[j];
          if (c == 0.0) continue;
          const int to = link.param_map[j];
          if (to < 0) {
            row.add(-1 - to, -c);
          } else {
            rhs.terms.emplace_back(to, c);
          }
        }
        sp.lp.add_row(row, Sense::kGreaterEqual, std::move(rhs),
                      fmt::format("cut{}_{}", link.sub, link.synced));
        fresh.push_back(sp.lp.lp.rows.back());
      }
    }
    if (!fresh.empty()) sp.solver->add_rows(fresh);
  }

  LpSolution solve(int s, std::span<const double> p) {
    sync_cuts(s);
    Subproblem& sp = subs_[s];
    for (int i = 0; i < sp.lp.lp.num_rows(); ++i) {
      auto [lo, hi] = sp.lp.row_bounds(i, p);
      sp.solver->set_row_bounds(i, lo, hi);
    }
    ++stats_.forward_solves;
    return sp.solver->solve();
  }

  LpRow master_row(int child_index, const Cut& cut) const {
    const int s = master_layout_.child_subs[child_index];
    const ParamLayout& lay = subs_[s].layout;
    const ExtensiveLayout& fs = master_layout_.first_stage;
    const int root_group = agg_.node_group[m_.tree().root()];
    std::vector<int> map(lay.size());
    for (int j = 0; j < lay.state; ++j) map[j] = fs.state_col[m_.tree().root()] + j;
    for (int k = 1; k <= lay.lags; ++k) {
      for (int l = 0; l < block_; ++l) map[lay.lag_offset(k) + l] = fs.group_col[root_group] + l;
    }
    for (size_t i = 0; i < lay.groups.size(); ++i) {
      for (int l = 0; l < block_; ++l) {
        map[lay.group_offset(i) + l] = fs.group_col[lay.groups[i]] + l;
      }
    }
    LpRow row;
    if (!cut.feasibility) row.add(master_layout_.theta_col[child_index], 1.0);
    for (size_t j = 0; j < cut.coef.size(); ++j) {
      if (cut.coef[j] != 0.0) row.add(map[j], -cut.coef[j]);
    }
    row.lower = cut.constant;
    row.upper = kInf;
    return row;
  }

  std::vector<int> sample_leaves(const std::vector<int>& leaves, int k) {
    if (k >= static_cast<int>(leaves.size())) return leaves;
    // Weighted sampling without replacement by exponential keys.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, int>> keys;
    for (int n : leaves) {
      double u = unit(rng_);
      while (u <= 0.0) u = unit(rng_);
      keys.emplace_back(std::log(u) / m_.tree().node(n).p, n);
    }
    std::partial_sort(keys.begin(), keys.begin() + k, keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<int> out;
    for (int i = 0; i < k; ++i) out.push_back(keys[i].second);
    return out;
  }

  void add_cut(int s, Cut cut) {
    if (cut.feasibility) {
      ++stats_.feasibility_cuts;
    } else {
      ++stats_.optimality_cuts;
    }
    subs_[s].pool.push_back(std::move(cut));
  }

  std::optional<LpRow> subroutine(std::span<const double> x, int child_index) {
    ++stats_.subroutine_calls;
    const ScenarioTree& tree = m_.tree();
    const std::vector<double> z = group_values(x);
    const int root_state = master_layout_.first_stage.state_col[tree.root()];
    const std::vector<double> x_root(x.begin() + root_state, x.begin() + root_state + m_.dims().state);
    const double theta_master = x[master_layout_.theta_col[child_index]];
    const int first = pg_.subs[master_layout_.child_subs[child_index]].nodes.front();
    const std::vector<int>& leaves = leaves_[child_index];
    const int all = static_cast<int>(leaves.size());
    int k = cfg_.samples > 0 ? std::min(cfg_.samples, all) : std::min(20, all);
    int rounds = 0;
    const double floor = 1e-8;

    for (std::int64_t pass = 0; pass < cfg_.max_passes; ++pass) {
      bool cut_added = false;
      for (int leaf : sample_leaves(leaves, k)) {
        std::vector<int> nodes;
        for (int n = leaf; n != tree.node(first).parent; n = tree.node(n).parent) nodes.push_back(n);
        std::reverse(nodes.begin(), nodes.end());

        std::vector<StageSolve> path;
        std::vector<double> x_prev = x_root;
        bool infeasible = false;
        for (int n : nodes) {
          StageSolve st;
          st.node = n;
          st.sub = pg_.node_sub[n];
          st.params = node_params(n, x_prev, z);
          st.sol = solve(st.sub, st.params);
          if (st.sol.status == LpStatus::kUnbounded) {
            throw NumericalFailure(fmt::format("subproblem {} is unbounded", st.sub));
          }
          if (st.sol.status == LpStatus::kInfeasible) {
            Cut cut = make_feasibility_cut(subs_[st.sub].lp, st.params, st.sol);
            add_cut(st.sub, cut);
            cut_added = true;
            if (n == first) return master_row(child_index, cut);
            infeasible = true;
            break;
          }
          x_prev.assign(st.sol.primal.begin(), st.sol.primal.begin() + m_.dims().state);
          path.push_back(std::move(st));
        }
        if (infeasible) continue;
        for (int t = static_cast<int>(path.size()) - 1; t >= 0; --t) {
          const StageSolve& st = path[t];
          const double theta_hat =
              t == 0 ? theta_master
                     : path[t - 1].sol.primal[theta_index(path[t - 1].sub, st.sub)];
          const double q = st.sol.objective;
          if (q - theta_hat > cfg_.epsilon * std::abs(q) + floor) {
            Cut cut = make_optimality_cut(subs_[st.sub].lp, st.params, st.sol);
            add_cut(st.sub, cut);
            cut_added = true;
            if (t == 0) return master_row(child_index, cut);
          }
        }
      }
      ++rounds;
      ++stats_.rounds;
      if (cfg_.exact) {
        if (!cut_added) {
          if (k >= all) return std::nullopt;
          k = all;
        }
      } else if (!cut_added || rounds >= cfg_.max_rounds) {
        return std::nullopt;
      }
    }
    throw NumericalFailure("SDDP pass limit reached without convergence");
  }
};

SddpEngine::SddpEngine(const Msilp& m, const AggregationMap& agg, SddpConfig config)
    : impl_(std::make_unique<Impl>(m, agg, config)) {}
SddpEngine::~SddpEngine() = default;

const Msilp& SddpEngine::model() const { return impl_->m_; }
const AggregationMap& SddpEngine::aggregation() const { return impl_->agg_; }
const PolicyGraph& SddpEngine::graph() const { return impl_->pg_; }
const SddpConfig& SddpEngine::config() const { return impl_->cfg_; }
SddpConfig& SddpEngine::mutable_config() { return impl_->cfg_; }
const ParamLayout& SddpEngine::layout(int sub) const { return impl_->subs_.at(sub).layout; }
const ParametricLp& SddpEngine::subproblem(int sub) const { return impl_->subs_.at(sub).lp; }
const std::vector<Cut>& SddpEngine::cuts(int sub) const { return impl_->subs_.at(sub).pool; }
const SddpStats& SddpEngine::stats() const { return impl_->stats_; }
const MasterLayout& SddpEngine::master_layout() const { return impl_->master_layout_; }

MipProblem SddpEngine::master() const {
  MipProblem p = impl_->master_;
  for (const LpRow& row : impl_->master_cuts_) p.lp.add_row(row);
  return p;
}

std::vector<double> SddpEngine::group_values(std::span<const double> master_x) const {
  return impl_->group_values(master_x);
}

std::vector<double> SddpEngine::node_params(int n, std::span<const double> parent_state,
                                            std::span<const double> groups) const {
  return impl_->node_params(n, parent_state, groups);
}

LpSolution SddpEngine::solve_subproblem(int sub, std::span<const double> p) {
  if (impl_->pg_.subs.at(sub).stage < 2) throw InvalidArgument("not a subproblem");
  return impl_->solve(sub, p);
}

std::optional<LpRow> SddpEngine::subroutine(std::span<const double> master_x, int child_sub) {
  const auto& subs = impl_->master_layout_.child_subs;
  auto it = std::find(subs.begin(), subs.end(), child_sub);
  if (it == subs.end()) throw InvalidArgument("not a stage-2 subproblem");
  auto row = impl_->subroutine(master_x, static_cast<int>(it - subs.begin()));
  if (row) {
    ++impl_->stats_.master_cuts;
    impl_->master_cuts_.push_back(*row);
  }
  return row;
}

std::vector<LpRow> SddpEngine::separate(std::span<const double> master_x) {
  std::vector<LpRow> rows;
  for (int s : impl_->master_layout_.child_subs) {
    if (auto row = subroutine(master_x, s)) rows.push_back(std::move(*row));
  }
  return rows;
}

namespace {

class EngineOracle : public CutOracle {
 public:
  explicit EngineOracle(SddpEngine& engine) : engine_(engine) {}
  std::vector<LpRow> separate(std::span<const double> x) override { return engine_.separate(x); }

 private:
  SddpEngine& engine_;
};

}  // namespace

SddpResult run_sddp_branch_and_cut(SddpEngine& engine, const std::vector<double>* fixed_groups) {
  const auto start = std::chrono::steady_clock::now();
  MipProblem master = engine.master();
  const ExtensiveLayout& fs = engine.master_layout().first_stage;
  const int block = engine.model().dims().integer;
  if (fixed_groups) {
    if (fixed_groups->size() != fs.group_col.size() * static_cast<size_t>(block)) {
      throw DimensionMismatch("one value per group and integer variable expected");
    }
    for (size_t g = 0; g < fs.group_col.size(); ++g) {
      for (int l = 0; l < block; ++l) {
        const double v = std::round((*fixed_groups)[g * block + l]);
        master.lp.col_lower[fs.group_col[g] + l] = v;
        master.lp.col_upper[fs.group_col[g] + l] = v;
      }
    }
  }
  EngineOracle oracle(engine);
  SddpResult out;
  out.mip = branch_and_cut(master, engine.master_layout().child_subs.empty() ? nullptr : &oracle,
                           engine.config().mip);
  if (out.mip.has_incumbent()) out.groups = engine.group_values(out.mip.x);
  out.stats = engine.stats();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SddpResult solve_exact(const Msilp& m, const AggregationMap& agg, SddpConfig config) {
  config.exact = true;
  SddpEngine engine(m, agg, config);
  return run_sddp_branch_and_cut(engine);
}

SddpConfig lower_bound_config(SddpConfig base) {
  base.exact = false;
  base.epsilon = 0.1;
  base.max_rounds = 3;
  return base;
}

SddpResult solve_lower_bound(const Msilp& m, const AggregationMap& agg, SddpConfig config) {
  config.exact = false;
  SddpEngine engine(m, agg, config);
  return run_sddp_branch_and_cut(engine);
}

double evaluate_policy(const Msilp& m, const AggregationMap& agg,
                       const std::vector<double>& groups, SddpConfig config) {
  config.exact = true;
  SddpEngine engine(m, agg, config);
  SddpResult r = run_sddp_branch_and_cut(engine, &groups);
  if (!r.mip.has_incumbent()) throw InfeasiblePolicy("fixed integer values admit no completion");
  return r.mip.objective;
}

}  // namespace mcagg
