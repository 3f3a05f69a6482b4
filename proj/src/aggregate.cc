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

#include "mcagg/aggregate.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>

#include "mcagg/errors.h"

namespace mcagg {

const char* to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kHN:
      return "hn";
    case TransformKind::kMA:
      return "ma";
    case TransformKind::kMM:
      return "mm";
    case TransformKind::kPM:
      return "pm";
    case TransformKind::kFH:
      return "fh";
  }
  return "?";
}

TransformKind parse_transform(const std::string& name) {
  std::string s = name;
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "hn") return TransformKind::kHN;
  if (s == "ma") return TransformKind::kMA;
  if (s == "mm") return TransformKind::kMM;
  if (s == "pm") return TransformKind::kPM;
  if (s == "fh") return TransformKind::kFH;
  throw InvalidArgument("unknown transformation '" + name + "'");
}

Eigen::MatrixXi build_phi(const Transformation& tr, int t, int s) {
  if (t < 1) throw InvalidStage("stage must be at least 1");
  const int width = s * t;
  TransformKind kind = tr.kind;
  if (t == 1 && (kind == TransformKind::kMM || kind == TransformKind::kPM)) {
    kind = TransformKind::kMA;
  }
  switch (kind) {
    case TransformKind::kHN:
      return Eigen::MatrixXi::Zero(1, width);
    case TransformKind::kMA: {
      Eigen::MatrixXi phi = Eigen::MatrixXi::Zero(s, width);
      phi.rightCols(s).setIdentity();
      return phi;
    }
    case TransformKind::kMM: {
      Eigen::MatrixXi phi = Eigen::MatrixXi::Zero(2 * s, width);
      phi.rightCols(2 * s).setIdentity();
      return phi;
    }
    case TransformKind::kPM: {
      const auto& attrs = tr.partial_attrs;
      if (attrs.empty()) throw InvalidArgument("partial attribute set is empty");
      std::set<int> distinct(attrs.begin(), attrs.end());
      if (distinct.size() != attrs.size() || *distinct.begin() < 0 ||
          *distinct.rbegin() >= s) {
        throw InvalidArgument("bad partial attribute set");
      }
      const int q = static_cast<int>(attrs.size());
      Eigen::MatrixXi phi = Eigen::MatrixXi::Zero(q + s, width);
      int r = 0;
      for (int a : distinct) phi(r++, s * (t - 2) + a) = 1;
      phi.bottomRightCorner(s, s).setIdentity();
      return phi;
    }
    case TransformKind::kFH:
      return Eigen::MatrixXi::Identity(width, width);
  }
  return {};
}

AggregationMap build_aggregation(const ScenarioTree& tree, const Transformation& tr) {
  AggregationMap agg;
  agg.transform = tr;
  agg.node_group.assign(tree.num_nodes(), -1);
  agg.stage_group_begin.assign(tree.stages() + 2, 0);
  const int s = tree.chain().attr_count();
  for (int t = 1; t <= tree.stages(); ++t) {
    agg.stage_group_begin[t] = agg.num_groups();
    const Eigen::MatrixXi phi = build_phi(tr, t, s);
    std::map<std::vector<int>, int> index;
    for (int n = tree.stage_begin(t); n < tree.stage_end(t); ++n) {
      const std::vector<int> hist = flat_history(tree, n);
      const Eigen::Map<const Eigen::VectorXi> h(hist.data(), static_cast<Eigen::Index>(hist.size()));
      const Eigen::VectorXi k = phi * h;
      std::vector<int> key(k.data(), k.data() + k.size());
      auto [it, inserted] = index.emplace(key, agg.num_groups());
      if (inserted) {
        agg.group_stage.push_back(t);
        agg.group_key.push_back(std::move(key));
        agg.group_members.emplace_back();
      }
      agg.node_group[n] = it->second;
      agg.group_members[it->second].push_back(n);
    }
  }
  agg.stage_group_begin[tree.stages() + 1] = agg.num_groups();
  return agg;
}

bool refines(const AggregationMap& a, const AggregationMap& b) {
  if (a.node_group.size() != b.node_group.size()) return false;
  for (const auto& members : a.group_members) {
    for (int n : members) {
      if (b.node_group[n] != b.node_group[members.front()]) return false;
    }
  }
  return true;
}

PolicyGraph build_policy_graph(const ScenarioTree& tree, const AggregationMap& agg) {
  PolicyGraph g;
  g.node_sub.assign(tree.num_nodes(), -1);
  g.stage_begin.assign(tree.stages() + 2, 0);
  for (int t = 1; t <= tree.stages(); ++t) {
    g.stage_begin[t] = g.num_subproblems();
    if (t == 1) continue;
    std::map<std::pair<int, int>, int> index;
    for (int n = tree.stage_begin(t); n < tree.stage_end(t); ++n) {
      const std::pair<int, int> key{tree.node(n).mc_state, agg.node_group[n]};
      auto [it, inserted] = index.emplace(key, g.num_subproblems());
      if (inserted) {
        PolicyGraph::Subproblem sub;
        sub.stage = t;
        sub.mc_state = key.first;
        sub.group = key.second;
        g.subs.push_back(std::move(sub));
      }
      g.node_sub[n] = it->second;
      g.subs[it->second].nodes.push_back(n);
    }
  }
  g.stage_begin[tree.stages() + 1] = g.num_subproblems();
  for (auto& sub : g.subs) {
    bool first = true;
    for (int n : sub.nodes) {
      const TreeNode& node = tree.node(n);
      std::vector<std::pair<int, double>> kids;
      for (int c = node.first_child; c >= 0 && c < node.first_child + node.num_children; ++c) {
        kids.emplace_back(g.node_sub[c], tree.node(c).p_cond);
      }
      std::sort(kids.begin(), kids.end());
      if (first) {
        sub.children = std::move(kids);
        first = false;
        continue;
      }
      bool same = kids.size() == sub.children.size();
      for (std::size_t k = 0; same && k < kids.size(); ++k) {
        same = kids[k].first == sub.children[k].first &&
               std::abs(kids[k].second - sub.children[k].second) <= 1e-12;
      }
      if (!same) throw InvalidArgument("nodes of one subproblem disagree on children");
    }
  }
  return g;
}

}  // namespace mcagg
