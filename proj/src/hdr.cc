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

#include "mcagg/hdr.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "mcagg/errors.h"

namespace mcagg {
namespace {

using json = nlohmann::json;

// Rows 1 and 4 carry the only values that keep each row stochastic.
constexpr IntensityMatrix kIntensity = {{
    {1.00, 0.00, 0.00, 0.00, 0.00, 0.00},
    {0.11, 0.83, 0.06, 0.00, 0.00, 0.00},
    {0.00, 0.15, 0.60, 0.25, 0.00, 0.00},
    {0.00, 0.00, 0.04, 0.68, 0.28, 0.00},
    {0.00, 0.00, 0.00, 0.18, 0.79, 0.03},
    {0.00, 0.00, 0.00, 0.00, 0.50, 0.50},
}};

constexpr std::array<double, 4> kType1Increments = {0.10, 0.20, 0.30, 0.40};
constexpr std::array<double, 4> kType2Increments = {0.15, 0.30, 0.45, 0.60};

// Splits total into n random shares using sorted uniform cut points.
std::vector<double> random_split(std::mt19937_64& rng, double total, int n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> cuts = {0.0};
  for (int k = 0; k + 1 < n; ++k) cuts.push_back(unit(rng));
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> shares(n);
  for (int k = 0; k < n; ++k) shares[k] = total * (cuts[k + 1] - cuts[k]);
  return shares;
}

std::vector<std::vector<int>> location_sets(int cols) {
  std::vector<std::vector<int>> sets;
  for (int c = 0; c + 1 < cols; ++c) sets.push_back({c, c + 1});
  std::vector<int> all(cols);
  for (int c = 0; c < cols; ++c) all[c] = c;
  if (std::find(sets.begin(), sets.end(), all) == sets.end()) sets.push_back(all);
  return sets;
}

double intensity_multiplier(const HdrInstance& inst, const McState& m) {
  return 1.0 + inst.config.costs.intensity_factor * m.attrs[kAttrIntensity];
}

}  // namespace

const IntensityMatrix& intensity_matrix() { return kIntensity; }

MarkovChain intensity_chain(int initial_level) {
  std::vector<McState> states;
  std::vector<Transition> transitions;
  for (int i = 0; i < kIntensityLevels; ++i) {
    states.push_back({{i}});
    for (int j = 0; j < kIntensityLevels; ++j) {
      if (kIntensity[i][j] > 0.0) transitions.push_back({i, j, kIntensity[i][j]});
    }
  }
  return MarkovChain(std::move(states), std::move(transitions), initial_level);
}

double move_probability(int cols, int x, int x_to, const MoveWeights& w) {
  const double left = x > 0 ? w.left : 0.0;
  const double right = x + 1 < cols ? w.right : 0.0;
  const double total = left + w.stay + right;
  if (x_to == x - 1) return left / total;
  if (x_to == x) return w.stay / total;
  if (x_to == x + 1) return right / total;
  return 0.0;
}

MarkovChain movement_chain(int cols, int rows, const std::vector<MoveWeights>& weights,
                           int initial_x) {
  if (static_cast<int>(weights.size()) != cols * rows) {
    throw DimensionMismatch("one weight triple per grid cell expected");
  }
  std::vector<McState> states;
  std::vector<Transition> transitions;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const int from = y * cols + x;
      states.push_back({{x, y}});
      if (y + 1 == rows) {
        transitions.push_back({from, from, 1.0});
        continue;
      }
      for (int to_x = std::max(0, x - 1); to_x <= std::min(cols - 1, x + 1); ++to_x) {
        const double p = move_probability(cols, x, to_x, weights[from]);
        if (p > 0.0) transitions.push_back({from, (y + 1) * cols + to_x, p});
      }
    }
  }
  return MarkovChain(std::move(states), std::move(transitions), initial_x);
}

HdrInstance generate_instance(const HdrConfig& cfg) {
  if (cfg.rows < 2 || cfg.cols < 1) throw InvalidArgument("grid needs at least 2 rows and 1 column");
  if (!(cfg.capacity_pct > 0.0 && cfg.capacity_pct <= 1.0)) {
    throw InvalidArgument("capacity percentage must lie in (0, 1]");
  }
  if (cfg.min_shelters < 1 || cfg.max_shelters < cfg.min_shelters || cfg.min_dcs < 1 ||
      cfg.max_dcs < cfg.min_dcs || cfg.max_dmax < cfg.min_dmax) {
    throw InvalidArgument("invalid generator ranges");
  }
  std::mt19937_64 rng(cfg.seed);
  HdrInstance inst;
  inst.config = cfg;
  inst.max_demand = std::uniform_real_distribution<double>(cfg.min_dmax, cfg.max_dmax)(rng);

  const double land_y = kSeaCellHeight * (cfg.rows - 1);
  std::uniform_real_distribution<double> along(0.0, kCellWidth);
  std::uniform_real_distribution<double> up(0.0, kLandCellHeight);
  for (int c = 0; c < cfg.cols; ++c) {
    const int n_shelters = std::uniform_int_distribution<int>(cfg.min_shelters, cfg.max_shelters)(rng);
    const int n_dcs = std::uniform_int_distribution<int>(cfg.min_dcs, cfg.max_dcs)(rng);
    for (double share : random_split(rng, inst.max_demand, n_shelters)) {
      Shelter s;
      s.site = {c, c * kCellWidth + along(rng), land_y + up(rng)};
      s.max_demand = share;
      inst.shelters.push_back(s);
    }
    for (double share : random_split(rng, inst.max_demand * cfg.capacity_pct, n_dcs)) {
      DistributionCenter d;
      d.site = {c, c * kCellWidth + along(rng), land_y + up(rng)};
      d.capacity = share;
      inst.dcs.push_back(d);
    }
  }

  std::vector<MoveWeights> weights(cfg.cols * cfg.rows);
  std::uniform_int_distribution<int> side(20, 40), stay(30, 40);
  for (MoveWeights& w : weights) {
    w.left = side(rng);
    w.stay = stay(rng);
    w.right = side(rng);
  }
  const int x0 = std::uniform_int_distribution<int>(0, cfg.cols - 1)(rng);
  const int i0 = std::uniform_int_distribution<int>(2, kIntensityLevels - 1)(rng);
  inst.chain = std::make_shared<const MarkovChain>(MarkovChain::product(
      movement_chain(cfg.cols, cfg.rows, weights, x0), intensity_chain(i0)));

  const auto& increments =
      cfg.modality_type == ModalityType::kType1 ? kType1Increments : kType2Increments;
  for (const auto& cells : location_sets(cfg.cols)) {
    for (double inc : increments) {
      Modality mod;
      mod.cells = cells;
      mod.increment = inc;
      inst.modalities.push_back(mod);
    }
  }
  for (int l = 0; l < inst.num_modalities(); ++l) {
    double added = 0.0;
    for (int j = 0; j < inst.num_dcs(); ++j) added += capacity_increment(inst, j, l);
    inst.modalities[l].cost = cfg.costs.modality_per_unit * added;
  }
  return inst;
}

std::array<double, 2> hurricane_position(const McState& m) {
  return {(m.attrs[kAttrX] + 0.5) * kCellWidth, (m.attrs[kAttrY] + 0.5) * kSeaCellHeight};
}

double distance(const Site& site, const std::array<double, 2>& point) {
  return std::hypot(site.x - point[0], site.y - point[1]);
}

double demand(const HdrInstance& inst, int shelter, const McState& m) {
  const Shelter& s = inst.shelters.at(shelter);
  const int level = m.attrs[kAttrIntensity];
  const double delta = distance(s.site, hurricane_position(m));
  if (level == 0 || delta >= inst.max_distance) return 0.0;
  const double scale = level / 5.0;
  return s.max_demand * (1.0 - delta / inst.max_distance) * scale * scale;
}

double production_cost(const HdrInstance& inst, int dc, const McState& m) {
  (void)inst.dcs.at(dc);
  return inst.config.costs.production * intensity_multiplier(inst, m);
}

double transport_cost(const HdrInstance& inst, int shelter, int dc, const McState& m) {
  const Site& a = inst.shelters.at(shelter).site;
  const Site& b = inst.dcs.at(dc).site;
  return inst.config.costs.transport_per_distance * std::hypot(a.x - b.x, a.y - b.y) *
         intensity_multiplier(inst, m);
}

double capacity_increment(const HdrInstance& inst, int dc, int modality) {
  const DistributionCenter& d = inst.dcs.at(dc);
  const Modality& mod = inst.modalities.at(modality);
  if (std::find(mod.cells.begin(), mod.cells.end(), d.site.cell) == mod.cells.end()) return 0.0;
  return mod.increment * d.capacity;
}

std::shared_ptr<const ScenarioTree> build_hdr_tree(const HdrInstance& inst, std::int64_t cap) {
  return std::make_shared<const ScenarioTree>(build_tree(inst.chain, inst.stages(), cap));
}

HdrLayout hdr_layout(const HdrInstance& inst, bool capacity_state) {
  HdrLayout lay;
  lay.shelters = inst.num_shelters();
  lay.dcs = inst.num_dcs();
  lay.modalities = inst.num_modalities();
  lay.has_capacity_state = capacity_state;
  return lay;
}

namespace {

std::shared_ptr<const NodeData> hdr_node(const HdrInstance& inst, const HdrLayout& lay,
                                         const McState& m, int stage) {
  const int ni = lay.shelters, nj = lay.dcs, nl = lay.modalities;
  const int k = lay.has_capacity_state ? 2 * nj : nj;
  const int r = nj + ni * nj + ni;
  const bool root = stage == 1;
  auto nd = std::make_shared<NodeData>();

  // At most one modality; active modalities stay active.
  std::vector<Triplet> own, parent;
  for (int l = 0; l < nl; ++l) own.push_back({0, l, 1.0});
  nd->int_rhs = {1.0};
  nd->int_sense = {Sense::kLessEqual};
  if (!root) {
    for (int l = 0; l < nl; ++l) {
      own.push_back({1 + l, l, 1.0});
      parent.push_back({1 + l, l, 1.0});
      nd->int_rhs.push_back(0.0);
      nd->int_sense.push_back(Sense::kGreaterEqual);
    }
  }
  const int int_rows = nd->num_int_rows();
  nd->int_own = SparseMatrix(int_rows, nl, own);
  if (!root) nd->int_parent = SparseMatrix(int_rows, nl, parent);

  // Linking rows: demand, inventory balance, production limit, and with
  // capacity states the capacity update.
  const int demand_row = 0, inventory_row = ni, production_row = ni + nj, capacity_row = ni + 2 * nj;
  const int n_rows = lay.has_capacity_state ? ni + 3 * nj : ni + 2 * nj;
  std::vector<Triplet> st, loc, par, lag;
  nd->link_rhs.assign(n_rows, 0.0);
  nd->link_sense.assign(n_rows, Sense::kEqual);
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nj; ++j) loc.push_back({demand_row + i, lay.shipment(i, j), 1.0});
    loc.push_back({demand_row + i, lay.shortage(i), 1.0});
    nd->link_rhs[demand_row + i] = demand(inst, i, m);
    nd->link_sense[demand_row + i] = Sense::kGreaterEqual;
  }
  for (int j = 0; j < nj; ++j) {
    const int row = inventory_row + j;
    st.push_back({row, lay.inventory(j), 1.0});
    for (int i = 0; i < ni; ++i) loc.push_back({row, lay.shipment(i, j), 1.0});
    loc.push_back({row, lay.production(j), -1.0});
    if (root) {
      nd->link_rhs[row] = inst.dcs[j].inventory;
    } else {
      par.push_back({row, lay.inventory(j), 1.0});
    }
  }
  for (int j = 0; j < nj; ++j) {
    const int row = production_row + j;
    loc.push_back({row, lay.production(j), 1.0});
    nd->link_sense[row] = Sense::kLessEqual;
    if (lay.has_capacity_state) {
      st.push_back({row, lay.capacity(j), -1.0});
    } else {
      nd->link_rhs[row] = inst.dcs[j].capacity;
      for (int l = 0; l < nl; ++l) {
        const double inc = capacity_increment(inst, j, l);
        if (inc != 0.0) lag.push_back({row, l, inc});
      }
    }
  }
  if (lay.has_capacity_state) {
    for (int j = 0; j < nj; ++j) {
      const int row = capacity_row + j;
      st.push_back({row, lay.capacity(j), 1.0});
      if (root) {
        nd->link_rhs[row] = inst.dcs[j].capacity;
      } else {
        par.push_back({row, lay.capacity(j), 1.0});
        for (int l = 0; l < nl; ++l) {
          const double inc = capacity_increment(inst, j, l);
          if (inc != 0.0) lag.push_back({row, l, inc});
        }
      }
    }
  }
  nd->link_state = SparseMatrix(n_rows, k, st);
  nd->link_int = SparseMatrix(n_rows, nl);
  nd->link_local = SparseMatrix(n_rows, r, loc);
  if (!root) nd->link_parent = SparseMatrix(n_rows, k, par);
  // With capacity states only the parent's modalities matter; otherwise
  // every strict ancestor contributes.
  const int lags = root ? 0 : (lay.has_capacity_state ? 1 : stage - 1);
  for (int d = 0; d < lags; ++d) nd->link_lag.push_back(SparseMatrix(n_rows, nl, lag));

  const HdrCosts& costs = inst.config.costs;
  for (int l = 0; l < nl; ++l) nd->int_cost.push_back(inst.modalities[l].cost);
  nd->state_cost.assign(k, 0.0);
  for (int j = 0; j < nj; ++j) nd->state_cost[lay.inventory(j)] = costs.holding;
  nd->local_cost.assign(r, 0.0);
  for (int j = 0; j < nj; ++j) {
    nd->local_cost[lay.production(j)] = production_cost(inst, j, m);
    for (int i = 0; i < ni; ++i) nd->local_cost[lay.shipment(i, j)] = transport_cost(inst, i, j, m);
  }
  for (int i = 0; i < ni; ++i) nd->local_cost[lay.shortage(i)] = costs.shortage;
  nd->int_lower.assign(nl, 0.0);
  nd->int_upper.assign(nl, 1.0);
  nd->state_lower.assign(k, 0.0);
  nd->state_upper.assign(k, kInf);
  nd->local_lower.assign(r, 0.0);
  nd->local_upper.assign(r, kInf);
  nd->realization = std::vector<double>(nd->link_rhs.begin(), nd->link_rhs.begin() + ni);
  return nd;
}

Msilp build_hdr(const HdrInstance& inst, std::shared_ptr<const ScenarioTree> tree,
                bool capacity_state) {
  if (!tree) tree = build_hdr_tree(inst);
  const HdrLayout lay = hdr_layout(inst, capacity_state);
  std::map<std::pair<int, int>, std::shared_ptr<const NodeData>> cache;
  std::vector<std::shared_ptr<const NodeData>> data;
  data.reserve(tree->num_nodes());
  for (int n = 0; n < tree->num_nodes(); ++n) {
    const TreeNode& node = tree->node(n);
    auto key = std::make_pair(node.stage, node.mc_state);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, hdr_node(inst, lay, inst.chain->state(node.mc_state), node.stage))
               .first;
    }
    data.push_back(it->second);
  }
  const int nj = lay.dcs, ni = lay.shelters;
  Dims dims{capacity_state ? 2 * nj : nj, lay.modalities, nj + ni * nj + ni};
  Msilp m(std::move(tree), dims, std::move(data));
  m.value_lower_bound = 0.0;
  for (int j = 0; j < nj; ++j) m.state_names.push_back(fmt::format("inv{}", j));
  if (capacity_state) {
    for (int j = 0; j < nj; ++j) m.state_names.push_back(fmt::format("cap{}", j));
  }
  for (int l = 0; l < lay.modalities; ++l) m.int_names.push_back(fmt::format("mod{}", l));
  for (int j = 0; j < nj; ++j) m.local_names.push_back(fmt::format("prod{}", j));
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nj; ++j) m.local_names.push_back(fmt::format("ship{}_{}", i, j));
  }
  for (int i = 0; i < ni; ++i) m.local_names.push_back(fmt::format("short{}", i));
  return m;
}

}  // namespace

Msilp build_hdr_msilp(const HdrInstance& inst, std::shared_ptr<const ScenarioTree> tree) {
  return build_hdr(inst, std::move(tree), true);
}

Msilp build_hdr_aggregated(const HdrInstance& inst, std::shared_ptr<const ScenarioTree> tree) {
  return build_hdr(inst, std::move(tree), false);
}

namespace {

json site_json(const Site& s) { return {{"cell", s.cell}, {"x", s.x}, {"y", s.y}}; }

Site site_from(const json& j) {
  return {j.at("cell").get<int>(), j.at("x").get<double>(), j.at("y").get<double>()};
}

}  // namespace

json to_json(const HdrInstance& inst) {
  const HdrConfig& c = inst.config;
  json out;
  out["version"] = kHdrSchemaVersion;
  out["seed"] = c.seed;
  out["grid"] = {{"cols", c.cols},
                 {"rows", c.rows},
                 {"cell_width", kCellWidth},
                 {"sea_cell_height", kSeaCellHeight},
                 {"land_cell_height", kLandCellHeight}};
  out["config"] = {{"capacity_pct", c.capacity_pct},
                   {"modality_type", c.modality_type == ModalityType::kType1 ? 1 : 2},
                   {"shelters_per_cell", {c.min_shelters, c.max_shelters}},
                   {"dcs_per_cell", {c.min_dcs, c.max_dcs}},
                   {"max_demand_range", {c.min_dmax, c.max_dmax}},
                   {"demand_split", "uniform-spacings"}};
  out["costs"] = {{"holding", c.costs.holding},
                  {"production", c.costs.production},
                  {"transport_per_distance", c.costs.transport_per_distance},
                  {"intensity_factor", c.costs.intensity_factor},
                  {"shortage", c.costs.shortage},
                  {"modality_per_unit", c.costs.modality_per_unit}};
  out["max_demand"] = inst.max_demand;
  out["max_distance"] = inst.max_distance;
  out["shelters"] = json::array();
  for (const Shelter& s : inst.shelters) {
    out["shelters"].push_back({{"site", site_json(s.site)}, {"max_demand", s.max_demand}});
  }
  out["dcs"] = json::array();
  for (const DistributionCenter& d : inst.dcs) {
    out["dcs"].push_back(
        {{"site", site_json(d.site)}, {"capacity", d.capacity}, {"inventory", d.inventory}});
  }
  out["modalities"] = json::array();
  for (const Modality& m : inst.modalities) {
    out["modalities"].push_back(
        {{"cells", m.cells}, {"increment", m.increment}, {"cost", m.cost}});
  }
  json states = json::array(), transitions = json::array();
  for (int i = 0; i < inst.chain->num_states(); ++i) states.push_back(inst.chain->state(i).attrs);
  for (const Transition& t : inst.chain->transitions()) {
    transitions.push_back(json::array({t.from, t.to, t.prob}));
  }
  out["mc"] = {{"states", states}, {"transitions", transitions}, {"initial", inst.chain->initial()}};
  return out;
}

HdrInstance instance_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != kHdrSchemaVersion) {
      throw ParseError(fmt::format("unsupported instance version {}", j.at("version").dump()));
    }
    HdrInstance inst;
    HdrConfig& c = inst.config;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.cols = j.at("grid").at("cols").get<int>();
    c.rows = j.at("grid").at("rows").get<int>();
    const json& cfg = j.at("config");
    c.capacity_pct = cfg.at("capacity_pct").get<double>();
    c.modality_type = cfg.at("modality_type").get<int>() == 1 ? ModalityType::kType1
                                                               : ModalityType::kType2;
    c.min_shelters = cfg.at("shelters_per_cell").at(0).get<int>();
    c.max_shelters = cfg.at("shelters_per_cell").at(1).get<int>();
    c.min_dcs = cfg.at("dcs_per_cell").at(0).get<int>();
    c.max_dcs = cfg.at("dcs_per_cell").at(1).get<int>();
    c.min_dmax = cfg.at("max_demand_range").at(0).get<double>();
    c.max_dmax = cfg.at("max_demand_range").at(1).get<double>();
    const json& costs = j.at("costs");
    c.costs.holding = costs.at("holding").get<double>();
    c.costs.production = costs.at("production").get<double>();
    c.costs.transport_per_distance = costs.at("transport_per_distance").get<double>();
    c.costs.intensity_factor = costs.at("intensity_factor").get<double>();
    c.costs.shortage = costs.at("shortage").get<double>();
    c.costs.modality_per_unit = costs.at("modality_per_unit").get<double>();
    inst.max_demand = j.at("max_demand").get<double>();
    inst.max_distance = j.at("max_distance").get<double>();
    for (const json& s : j.at("shelters")) {
      inst.shelters.push_back({site_from(s.at("site")), s.at("max_demand").get<double>()});
    }
    for (const json& d : j.at("dcs")) {
      inst.dcs.push_back({site_from(d.at("site")), d.at("capacity").get<double>(),
                          d.at("inventory").get<double>()});
    }
    for (const json& m : j.at("modalities")) {
      inst.modalities.push_back({m.at("cells").get<std::vector<int>>(),
                                 m.at("increment").get<double>(), m.at("cost").get<double>()});
    }
    std::vector<McState> states;
    for (const json& s : j.at("mc").at("states")) states.push_back({s.get<std::vector<int>>()});
    std::vector<Transition> transitions;
    for (const json& t : j.at("mc").at("transitions")) {
      transitions.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
    }
    inst.chain = std::make_shared<const MarkovChain>(std::move(states), std::move(transitions),
                                                     j.at("mc").at("initial").get<int>());
    return inst;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed instance: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid instance chain: ") + e.what());
  }
}

void write_instance(const HdrInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << to_json(inst).dump(1) << '\n';
}

HdrInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return instance_from_json(j);
}

}  // namespace mcagg
