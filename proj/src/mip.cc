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

#include "mcagg/mip.h"

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <tuple>
#include <vector>

#include "mcagg/errors.h"

namespace mcagg {

int MipProblem::num_integer() const {
  int count = 0;
  for (char c : integer) count += c != 0;
  return count;
}

const char* to_string(MipStatus status) {
  switch (status) {
    case MipStatus::kOptimal:
      return "optimal";
    case MipStatus::kInfeasible:
      return "infeasible";
    case MipStatus::kUnbounded:
      return "unbounded";
    case MipStatus::kTimeLimit:
      return "time_limit";
    case MipStatus::kNodeLimit:
      return "node_limit";
  }
  return "?";
}

namespace {

struct BoundChange {
  int col;
  double lower;
  double upper;
};

struct Node {
  std::int64_t id = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MipSolution branch_and_cut(const MipProblem& p, CutOracle* oracle,
                           const MipOptions& options) {
  p.lp.check();
  const int n = p.lp.num_cols();
  if (static_cast<int>(p.integer.size()) != n) {
    throw DimensionMismatch("integrality flags do not match columns");
  }
  for (int j = 0; j < n; ++j) {
    if (p.integer[j] &&
        (!std::isfinite(p.lp.col_lower[j]) || !std::isfinite(p.lp.col_upper[j]))) {
      throw InvalidArgument("integer column " + std::to_string(j) + " is unbounded");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  LpSolver solver(p.lp, options.lp);
  MipSolution out;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  open.push(Node{next_id++, -kInf, {}, nullptr});

  std::vector<double> cur_lower = p.lp.col_lower;
  std::vector<double> cur_upper = p.lp.col_upper;
  auto gap_tol = [&](double incumbent) {
    return std::max(options.absolute_gap, options.relative_gap * std::abs(incumbent));
  };

  bool limit_hit = false;
  MipStatus limit_status = MipStatus::kTimeLimit;
  double limit_bound = kInf;
  while (!open.empty()) {
    if (out.has_incumbent() && open.top().bound >= out.objective - gap_tol(out.objective)) {
      break;
    }
    if (elapsed() > options.time_limit ||
        (options.node_limit > 0 && out.nodes >= options.node_limit)) {
      limit_hit = true;
      limit_status = elapsed() > options.time_limit ? MipStatus::kTimeLimit
                                                    : MipStatus::kNodeLimit;
      limit_bound = open.top().bound;
      break;
    }
    Node node = open.top();
    open.pop();
    ++out.nodes;
    const bool is_root = node.id == 0;

    // Reset integer bounds to the root box, then apply this node's changes.
    for (int j = 0; j < n; ++j) {
      if (!p.integer[j]) continue;
      double lo = p.lp.col_lower[j];
      double hi = p.lp.col_upper[j];
      for (const BoundChange& c : node.changes) {
        if (c.col == j) {
          lo = c.lower;
          hi = c.upper;
        }
      }
      if (lo != cur_lower[j] || hi != cur_upper[j]) {
        solver.set_col_bounds(j, lo, hi);
        cur_lower[j] = lo;
        cur_upper[j] = hi;
      }
    }
    if (node.basis) solver.set_basis(*node.basis);

    while (true) {
      const LpSolution sol = solver.solve();
      if (sol.status == LpStatus::kInfeasible) break;
      if (sol.status == LpStatus::kUnbounded) {
        out.status = MipStatus::kUnbounded;
        out.lp_iterations = solver.total_iterations();
        out.bound = -kInf;
        return out;
      }
      if (is_root) out.root_cut_loop.push_back(sol.objective);
      if (out.has_incumbent() && sol.objective >= out.objective - gap_tol(out.objective)) {
        break;
      }
      int branch_col = -1;
      double most = options.integrality_tol;
      for (int j = 0; j < n; ++j) {
        if (!p.integer[j]) continue;
        const double f = std::abs(sol.primal[j] - std::round(sol.primal[j]));
        if (f > most) {
          most = f;
          branch_col = j;
        }
      }
      if (branch_col < 0) {
        std::vector<double> x = sol.primal;
        for (int j = 0; j < n; ++j) {
          if (p.integer[j]) x[j] = std::round(x[j]);
        }
        if (oracle != nullptr) {
          ++out.oracle_calls;
          std::vector<LpRow> cuts = oracle->separate(x);
          if (!cuts.empty()) {
            out.cuts += static_cast<std::int64_t>(cuts.size());
            solver.add_rows(cuts);
            continue;
          }
        }
        out.x = std::move(x);
        out.objective = sol.objective;
        break;
      }
      const double v = sol.primal[branch_col];
      auto basis = std::make_shared<const Basis>(sol.basis);
      Node down{next_id++, sol.objective, node.changes, basis};
      down.changes.push_back({branch_col, cur_lower[branch_col], std::floor(v)});
      Node up{next_id++, sol.objective, node.changes, basis};
      up.changes.push_back({branch_col, std::ceil(v), cur_upper[branch_col]});
      open.push(std::move(down));
      open.push(std::move(up));
      break;
    }
  }
  out.lp_iterations = solver.total_iterations();
  double open_bound = kInf;
  if (limit_hit) open_bound = limit_bound;
  else if (!open.empty()) open_bound = open.top().bound;
  if (out.has_incumbent()) {
    out.bound = std::min(out.objective, open_bound);
    out.gap = (out.objective - out.bound) / std::max(std::abs(out.objective), 1e-9);
    out.status = limit_hit ? limit_status : MipStatus::kOptimal;
  } else {
    out.bound = limit_hit ? open_bound : kInf;
    out.status = limit_hit ? limit_status : MipStatus::kInfeasible;
  }
  return out;
}

}  // namespace mcagg
