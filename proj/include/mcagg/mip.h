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

// Best-bound branch and bound with lazy cuts supplied by a callback.

#ifndef MCAGG_MIP_H_
#define MCAGG_MIP_H_

#include <cstdint>
#include <span>
#include <vector>

#include "mcagg/lp.h"

namespace mcagg {

struct MipProblem {
  LpProblem lp;
  std::vector<char> integer;  // one flag per column

  int add_column(double obj, double lower, double upper, bool is_integer,
                 std::string name = {}) {
    integer.push_back(is_integer ? 1 : 0);
    return lp.add_column(obj, lower, upper, std::move(name));
  }
  int num_integer() const;
};

// Separation callback invoked at every integer-feasible relaxation solution.
// The point passed has its integer columns rounded. Returned rows are added
// globally; an empty result accepts the point.
class CutOracle {
 public:
  virtual ~CutOracle() = default;
  virtual std::vector<LpRow> separate(std::span<const double> x) = 0;
};

enum class MipStatus { kOptimal, kInfeasible, kUnbounded, kTimeLimit, kNodeLimit };

const char* to_string(MipStatus status);

struct MipOptions {
  double integrality_tol = 1e-6;
  double relative_gap = 1e-6;
  double absolute_gap = 1e-9;
  double time_limit = kInf;  // seconds
  std::int64_t node_limit = 0;  // 0 means unlimited
  LpOptions lp;
};

struct MipSolution {
  MipStatus status = MipStatus::kInfeasible;
  std::vector<double> x;
  double objective = kInf;  // incumbent value
  double bound = -kInf;
  double gap = kInf;
  std::int64_t nodes = 0;
  std::int64_t cuts = 0;
  std::int64_t oracle_calls = 0;
  std::int64_t lp_iterations = 0;
  // Relaxation values seen at the root while cuts were being added.
  std::vector<double> root_cut_loop;

  bool has_incumbent() const { return !x.empty(); }
};

MipSolution branch_and_cut(const MipProblem& p, CutOracle* oracle = nullptr,
                           const MipOptions& options = {});

}  // namespace mcagg

#endif  // MCAGG_MIP_H_
