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

#include "mcagg/markov.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "mcagg/errors.h"

namespace mcagg {

std::string to_string(const McState& state) {
  std::string out = "(";
  for (std::size_t i = 0; i < state.attrs.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(state.attrs[i]);
  }
  return out + ")";
}

MarkovChain::MarkovChain(std::vector<McState> states,
                         std::vector<Transition> transitions, int initial)
    : states_(std::move(states)), transitions_(std::move(transitions)),
      initial_(initial) {
  if (states_.empty()) throw InvalidArgument("chain has no states");
  attr_count_ = static_cast<int>(states_[0].attrs.size());
  for (int i = 0; i < num_states(); ++i) {
    if (static_cast<int>(states_[i].attrs.size()) != attr_count_) {
      throw InvalidArgument("states have different attribute counts");
    }
    if (!index_.emplace(states_[i], i).second) {
      throw InvalidArgument("duplicate state " + to_string(states_[i]));
    }
  }
  if (initial_ < 0 || initial_ >= num_states()) {
    throw InvalidArgument("initial state out of range");
  }
  succ_.assign(num_states(), {});
  std::set<std::pair<int, int>> seen;
  std::vector<double> total(num_states(), 0.0);
  std::vector<char> has_out(num_states(), 0);
  for (const Transition& tr : transitions_) {
    if (tr.from < 0 || tr.from >= num_states() || tr.to < 0 || tr.to >= num_states()) {
      throw InvalidArgument("transition refers to a missing state");
    }
    if (!(tr.prob >= 0.0 && tr.prob <= 1.0)) {
      throw InvalidArgument("transition probability outside [0, 1]");
    }
    if (!seen.emplace(tr.from, tr.to).second) {
      throw InvalidArgument("duplicate transition");
    }
    total[tr.from] += tr.prob;
    has_out[tr.from] = 1;
    if (tr.prob > 0.0) succ_[tr.from].push_back({tr.to, tr.prob});
  }
  for (int i = 0; i < num_states(); ++i) {
    if (has_out[i] && std::abs(total[i] - 1.0) > 1e-9) {
      throw InvalidArgument("outgoing probabilities of " + to_string(states_[i]) +
                            " sum to " + std::to_string(total[i]));
    }
    std::sort(succ_[i].begin(), succ_[i].end(),
              [](const Edge& a, const Edge& b) { return a.to < b.to; });
  }
}

MarkovChain MarkovChain::product(const MarkovChain& a, const MarkovChain& b) {
  std::vector<McState> states;
  states.reserve(a.num_states() * b.num_states());
  for (int i = 0; i < a.num_states(); ++i) {
    for (int j = 0; j < b.num_states(); ++j) {
      McState s;
      s.attrs = a.state(i).attrs;
      s.attrs.insert(s.attrs.end(), b.state(j).attrs.begin(), b.state(j).attrs.end());
      states.push_back(std::move(s));
    }
  }
  const int nb = b.num_states();
  std::vector<Transition> transitions;
  for (int i = 0; i < a.num_states(); ++i) {
    for (int j = 0; j < nb; ++j) {
      for (const Edge& ea : a.successors(i)) {
        for (const Edge& eb : b.successors(j)) {
          transitions.push_back({i * nb + j, ea.to * nb + eb.to, ea.prob * eb.prob});
        }
      }
    }
  }
  return MarkovChain(std::move(states), std::move(transitions),
                     a.initial() * nb + b.initial());
}

const McState& MarkovChain::state(int i) const {
  if (i < 0 || i >= num_states()) throw UnknownState("state index " + std::to_string(i));
  return states_[i];
}

int MarkovChain::index_of(const McState& state) const {
  auto it = index_.find(state);
  if (it == index_.end()) throw UnknownState("unknown state " + to_string(state));
  return it->second;
}

const std::vector<MarkovChain::Edge>& MarkovChain::successors(int i) const {
  if (i < 0 || i >= num_states()) throw UnknownState("state index " + std::to_string(i));
  return succ_[i];
}

double MarkovChain::transition_prob(int from, int to) const {
  for (const Edge& e : successors(from)) {
    if (e.to == to) return e.prob;
  }
  state(to);
  return 0.0;
}

std::vector<int> reachable_state_indices(const MarkovChain& mc, int t) {
  if (t < 1) throw InvalidStage("stage must be at least 1");
  std::set<int> current = {mc.initial()};
  for (int k = 1; k < t; ++k) {
    std::set<int> next;
    for (int s : current) {
      for (const auto& e : mc.successors(s)) next.insert(e.to);
    }
    current = std::move(next);
  }
  return {current.begin(), current.end()};
}

std::vector<McState> reachable_states(const MarkovChain& mc, int t) {
  std::vector<McState> out;
  for (int i : reachable_state_indices(mc, t)) out.push_back(mc.state(i));
  std::sort(out.begin(), out.end());
  return out;
}

double transition_prob(const MarkovChain& mc, const McState& from,
                       const McState& to) {
  return mc.transition_prob(mc.index_of(from), mc.index_of(to));
}

}  // namespace mcagg
