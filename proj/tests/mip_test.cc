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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lp_oracle.h"
#include "mcagg/errors.h"
#include "mip_oracle.h"

namespace mcagg {
namespace {

using testing::Rand;

TEST(MipTest, PureLpMatchesSolveLp) {
  Rand rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    MipProblem p;
    p.lp = testing::random_feasible_lp(rng, 15, 15);
    p.integer.assign(p.lp.num_cols(), 0);
    const MipSolution mip = branch_and_cut(p);
    const LpSolution lp = solve_lp(p.lp);
    ASSERT_EQ(mip.status, MipStatus::kOptimal);
    EXPECT_NEAR(mip.objective, lp.objective, 1e-9 * (1 + std::abs(lp.objective)));
  }
}

TEST(MipTest, KnapsackMatchesEnumeration) {
  const std::vector<double> value = {10, 13, 7, 8, 4};
  const std::vector<double> weight = {5, 7, 4, 4, 2};
  const double capacity = 11;
  MipProblem p;
  LpRow row;
  for (int j = 0; j < 5; ++j) {
    p.add_column(-value[j], 0, 1, true);
    row.add(j, weight[j]);
  }
  row.set_sense(Sense::kLessEqual, capacity);
  p.lp.add_row(row);
  double best = 0.0;
  for (int mask = 0; mask < 32; ++mask) {
    double v = 0, w = 0;
    for (int j = 0; j < 5; ++j) {
      if (mask >> j & 1) {
        v += value[j];
        w += weight[j];
      }
    }
    if (w <= capacity) best = std::max(best, v);
  }
  const MipSolution s = branch_and_cut(p);
  ASSERT_EQ(s.status, MipStatus::kOptimal);
  EXPECT_NEAR(-s.objective, best, 1e-9);
  EXPECT_LE(s.bound, s.objective + 1e-9);
}

TEST(MipTest, RandomProblemsMatchEnumeration) {
  Rand rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const MipProblem p = testing::random_binary_mip(rng, 8, 3, 6);
    const testing::EnumResult e = testing::enumerate_binaries(p);
    const MipSolution s = branch_and_cut(p);
    if (!e.feasible) {
      EXPECT_EQ(s.status, MipStatus::kInfeasible) << trial;
      continue;
    }
    ASSERT_EQ(s.status, MipStatus::kOptimal) << trial;
    EXPECT_NEAR(s.objective, e.objective, 1e-6 * (1 + std::abs(e.objective))) << trial;
  }
}

// min c z + t with t >= max of two affine pieces in z; the pieces are only
// revealed through the oracle.
class TwoPieceOracle : public CutOracle {
 public:
  std::vector<LpRow> separate(std::span<const double> x) override {
    const double z = x[0];
    const double t = x[1];
    const double p1 = 3.0 * z + 1.0;
    const double p2 = -2.0 * z + 2.5;
    std::vector<LpRow> rows;
    LpRow row;
    row.add(1, 1.0);
    if (p1 >= p2) {
      if (t < p1 - 1e-9) {
        row.add(0, -3.0);
        row.set_sense(Sense::kGreaterEqual, 1.0);
        rows.push_back(row);
      }
    } else if (t < p2 - 1e-9) {
      row.add(0, 2.0);
      row.set_sense(Sense::kGreaterEqual, 2.5);
      rows.push_back(row);
    }
    return rows;
  }
};

TEST(MipTest, ToyBendersMatchesExtensiveForm) {
  for (double c : {-2.0, -0.5, 0.0, 1.0}) {
    MipProblem p;
    p.add_column(c, 0, 1, true);
    p.add_column(1.0, 0, kInf, false);
    TwoPieceOracle oracle;
    const MipSolution s = branch_and_cut(p, &oracle);
    double best = kInf;
    for (int z = 0; z <= 1; ++z) {
      LpProblem ext;
      ext.add_column(c, z, z);
      ext.add_column(1.0, 0, kInf);
      ext.add_row({0, 1}, {-3.0, 1.0}, Sense::kGreaterEqual, 1.0);
      ext.add_row({0, 1}, {2.0, 1.0}, Sense::kGreaterEqual, 2.5);
      best = std::min(best, solve_lp(ext).objective);
    }
    ASSERT_EQ(s.status, MipStatus::kOptimal);
    EXPECT_NEAR(s.objective, best, 1e-9) << "c=" << c;
    EXPECT_TRUE(oracle.separate(s.x).empty());
    for (std::size_t k = 1; k < s.root_cut_loop.size(); ++k) {
      EXPECT_GE(s.root_cut_loop[k], s.root_cut_loop[k - 1] - 1e-9);
    }
  }
}

TEST(MipTest, InfeasibleAndUnboundedIntegerColumn) {
  MipProblem p;
  p.add_column(1.0, 0, 1, true);
  p.lp.add_row({0}, {2.0}, Sense::kEqual, 1.0);
  EXPECT_EQ(branch_and_cut(p).status, MipStatus::kInfeasible);
  MipProblem q;
  q.add_column(1.0, 0, kInf, true);
  EXPECT_THROW(branch_and_cut(q), InvalidArgument);
}

}  // namespace
}  // namespace mcagg
