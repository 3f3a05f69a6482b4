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

// Hurricane disaster-relief instances: grid, hurricane chain, demand law,
// random instance generation and the two node formulations.

#ifndef MCAGG_HDR_H_
#define MCAGG_HDR_H_

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcagg/markov.h"
#include "mcagg/model.h"
#include "mcagg/tree.h"

namespace mcagg {

inline constexpr int kHdrSchemaVersion = 1;
inline constexpr int kIntensityLevels = 6;
// Attribute positions of a hurricane state.
inline constexpr int kAttrX = 0;
inline constexpr int kAttrY = 1;
inline constexpr int kAttrIntensity = 2;

enum class ModalityType { kType1, kType2 };

// Unit costs not fixed by the instance geometry.
struct HdrCosts {
  double holding = 0.5;              // per unit of inventory and stage
  double production = 5.0;           // base production cost
  double transport_per_distance = 0.01;
  double intensity_factor = 0.1;     // cost multiplier 1 + factor * intensity
  double shortage = 100.0;           // per unit of unmet demand
  double modality_per_unit = 2.0;    // per unit of added capacity and stage
};

struct HdrConfig {
  int cols = 4;
  int rows = 5;  // the top row is land, so the horizon is rows - 1
  double capacity_pct = 0.2;
  ModalityType modality_type = ModalityType::kType1;
  std::uint64_t seed = 1;
  int min_shelters = 3, max_shelters = 7;
  int min_dcs = 2, max_dcs = 4;
  double min_dmax = 1000.0, max_dmax = 1500.0;
  HdrCosts costs;

  int stages() const { return rows - 1; }
};

struct Site {
  int cell = 0;  // land column
  double x = 0.0;
  double y = 0.0;
};

struct Shelter {
  Site site;
  double max_demand = 0.0;
};

struct DistributionCenter {
  Site site;
  double capacity = 0.0;
  double inventory = 0.0;
};

struct Modality {
  std::vector<int> cells;  // affected land columns
  double increment = 0.0;  // fraction of the initial capacity per stage
  double cost = 0.0;
};

struct HdrInstance {
  HdrConfig config;
  double max_demand = 0.0;  // per land cell
  double max_distance = 150.0;
  std::vector<Shelter> shelters;
  std::vector<DistributionCenter> dcs;
  std::vector<Modality> modalities;
  std::shared_ptr<const MarkovChain> chain;

  int num_shelters() const { return static_cast<int>(shelters.size()); }
  int num_dcs() const { return static_cast<int>(dcs.size()); }
  int num_modalities() const { return static_cast<int>(modalities.size()); }
  int stages() const { return config.stages(); }
};

// Cell geometry: every column is 100 wide, sea rows are 20 high and the land
// row on top is 50 high. Row 0 is the bottom sea row.
inline constexpr double kCellWidth = 100.0;
inline constexpr double kSeaCellHeight = 20.0;
inline constexpr double kLandCellHeight = 50.0;

using IntensityMatrix = std::array<std::array<double, kIntensityLevels>, kIntensityLevels>;
const IntensityMatrix& intensity_matrix();

MarkovChain intensity_chain(int initial_level);
// Weights per origin cell are (left, stay, right); moves off the grid get
// no weight. Every state moves one row up; the top row is absorbing.
struct MoveWeights {
  double left = 0.0, stay = 0.0, right = 0.0;
};
MarkovChain movement_chain(int cols, int rows, const std::vector<MoveWeights>& weights,
                           int initial_x);
// Probability of moving from column x to column x_to given the weights of
// the origin cell.
double move_probability(int cols, int x, int x_to, const MoveWeights& w);

HdrInstance generate_instance(const HdrConfig& config);

// Center of the hurricane's cell.
std::array<double, 2> hurricane_position(const McState& m);
double distance(const Site& site, const std::array<double, 2>& point);

double demand(const HdrInstance& inst, int shelter, const McState& m);
double production_cost(const HdrInstance& inst, int dc, const McState& m);
double transport_cost(const HdrInstance& inst, int shelter, int dc, const McState& m);
// Capacity added per stage at dc while modality is active.
double capacity_increment(const HdrInstance& inst, int dc, int modality);

std::shared_ptr<const ScenarioTree> build_hdr_tree(const HdrInstance& inst,
                                                   std::int64_t cap = kDefaultNodeCap);

// Column layout of the HDR node blocks.
struct HdrLayout {
  int shelters = 0, dcs = 0, modalities = 0;
  bool has_capacity_state = true;

  int inventory(int j) const { return j; }
  int capacity(int j) const { return dcs + j; }
  int production(int j) const { return j; }
  int shipment(int i, int j) const { return dcs + i * dcs + j; }
  int shortage(int i) const { return dcs + shelters * dcs + i; }
};

// Capacities are continuous states updated from the parent's modalities.
Msilp build_hdr_msilp(const HdrInstance& inst, std::shared_ptr<const ScenarioTree> tree);
// Capacities eliminated; production is bounded by the initial capacity plus
// the increments of modalities active at strict ancestors.
Msilp build_hdr_aggregated(const HdrInstance& inst, std::shared_ptr<const ScenarioTree> tree);
HdrLayout hdr_layout(const HdrInstance& inst, bool capacity_state);

nlohmann::json to_json(const HdrInstance& inst);
HdrInstance instance_from_json(const nlohmann::json& j);
void write_instance(const HdrInstance& inst, const std::string& path);
// Throws ParseError.
HdrInstance read_instance(const std::string& path);

}  // namespace mcagg

#endif  // MCAGG_HDR_H_
