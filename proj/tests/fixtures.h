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

// Small chains shared by several tests.

#ifndef MCAGG_TESTS_FIXTURES_H_
#define MCAGG_TESTS_FIXTURES_H_

#include <memory>
#include <vector>

#include "lp_oracle.h"
#include "mcagg/hdr.h"
#include "mcagg/markov.h"

namespace mcagg::testing {

inline constexpr int kLight = 0;
inline constexpr int kDark = 1;

// Two states (light = 0, dark = 1), all transitions positive, start light.
inline std::shared_ptr<const MarkovChain> two_state_chain(double ll = 0.6, double dl = 0.3) {
  return std::make_shared<const MarkovChain>(
      std::vector<McState>{{{kLight}}, {{kDark}}},
      std::vector<Transition>{{0, 0, ll}, {0, 1, 1 - ll}, {1, 0, dl}, {1, 1, 1 - dl}}, 0);
}

// A chain with a single state.
inline std::shared_ptr<const MarkovChain> singleton_chain() {
  return std::make_shared<const MarkovChain>(std::vector<McState>{{{7}}},
                                             std::vector<Transition>{{0, 0, 1.0}}, 0);
}

// Random chain with two attributes per state; every state has at least one
// successor.
inline std::shared_ptr<const MarkovChain> random_chain(Rand& rng, int states) {
  std::vector<McState> s;
  for (int i = 0; i < states; ++i) s.push_back({{i % 3, i / 3}});
  std::vector<Transition> tr;
  for (int i = 0; i < states; ++i) {
    std::vector<double> w(states, 0.0);
    double total = 0.0;
    for (int j = 0; j < states; ++j) {
      if (rng.chance(0.6) || j == (i + 1) % states) w[j] = rng.integer(1, 9);
      total += w[j];
    }
    for (int j = 0; j < states; ++j) {
      if (w[j] > 0) tr.push_back({i, j, w[j] / total});
    }
  }
  return std::make_shared<const MarkovChain>(std::move(s), std::move(tr),
                                             rng.integer(0, states - 1));
}

// Small relief instance: cols land cells, rows - 1 stages, few sites.
inline HdrConfig small_hdr_config(std::uint64_t seed, int cols = 2, int rows = 4) {
  HdrConfig cfg;
  cfg.cols = cols;
  cfg.rows = rows;
  cfg.seed = seed;
  cfg.min_shelters = 1;
  cfg.max_shelters = 2;
  cfg.min_dcs = 1;
  cfg.max_dcs = 2;
  cfg.capacity_pct = 0.2;
  return cfg;
}

}  // namespace mcagg::testing

#endif  // MCAGG_TESTS_FIXTURES_H_
