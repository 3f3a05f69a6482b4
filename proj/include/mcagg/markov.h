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

// Finite Markov chains over integer attribute vectors.

#ifndef MCAGG_MARKOV_H_
#define MCAGG_MARKOV_H_

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace mcagg {

struct McState {
  std::vector<int> attrs;

  auto operator<=>(const McState&) const = default;
  bool operator==(const McState&) const = default;
};

std::string to_string(const McState& state);

struct Transition {
  int from = 0;
  int to = 0;
  double prob = 0.0;
};

class MarkovChain {
 public:
  struct Edge {
    int to;
    double prob;
  };

  // Validates the data: distinct states of a common length, probabilities in
  // [0, 1], each state's outgoing probabilities summing to 1 within 1e-9
  // when it has any, and a valid initial index. Throws InvalidArgument.
  MarkovChain(std::vector<McState> states, std::vector<Transition> transitions,
              int initial);

  // Chain on pairs with independent components; attributes are concatenated
  // and the pair (i, j) gets index i * b.num_states() + j.
  static MarkovChain product(const MarkovChain& a, const MarkovChain& b);

  int num_states() const { return static_cast<int>(states_.size()); }
  int attr_count() const { return attr_count_; }
  int initial() const { return initial_; }
  const McState& state(int i) const;
  // Throws UnknownState.
  int index_of(const McState& state) const;
  bool contains(const McState& state) const { return index_.count(state) > 0; }
  // Successors with positive probability, ordered by state index.
  const std::vector<Edge>& successors(int i) const;
  double transition_prob(int from, int to) const;
  const std::vector<Transition>& transitions() const { return transitions_; }

 private:
  std::vector<McState> states_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<Edge>> succ_;
  std::map<McState, int> index_;
  int initial_ = 0;
  int attr_count_ = 0;
};

// States reachable from the initial state in t - 1 positive-probability
// transitions, as sorted state indices. Throws InvalidStage when t < 1.
std::vector<int> reachable_state_indices(const MarkovChain& mc, int t);
std::vector<McState> reachable_states(const MarkovChain& mc, int t);

// Throws UnknownState when either state is not in the chain.
double transition_prob(const MarkovChain& mc, const McState& from,
                       const McState& to);

}  // namespace mcagg

#endif  // MCAGG_MARKOV_H_
