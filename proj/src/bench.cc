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

#include "mcagg/bench.h"

#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "mcagg/errors.h"
#include "mcagg/mip.h"
#include "mcagg/model.h"

namespace mcagg {

using nlohmann::json;

std::optional<double> gap_closed(double obj_hn, double obj, double obj_fh) {
  const double gap = obj_hn - obj_fh;
  if (!std::isfinite(gap) || std::abs(gap) <= 1e-9 * std::max(1.0, std::abs(obj_hn))) {
    return std::nullopt;
  }
  return 100.0 * (obj_hn - obj) / gap;
}

double relative_difference(double obj_ref, double obj) {
  if (obj_ref == 0.0) throw InvalidArgument("relative difference to a zero reference");
  return 100.0 * std::abs(obj_ref - obj) / obj_ref;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  return fmt::format("{:.6g}", v);
}

const char* to_string(Method m) {
  switch (m) {
    case Method::kExtensive:
      return "ex";
    case Method::kSddp:
      return "sddp";
    case Method::kSddpLowerBound:
      return "sddp-lb";
    case Method::kSddpUpperBound:
      return "sddp-ub";
    case Method::kLdrHistory:
      return "ldr-th";
    case Method::kLdrStage:
      return "ldr-t";
    case Method::kLdrMarkov:
      return "ldr-m";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kExtensive, Method::kSddp, Method::kSddpLowerBound,
                   Method::kSddpUpperBound, Method::kLdrHistory, Method::kLdrStage,
                   Method::kLdrMarkov}) {
    if (name == to_string(m)) return m;
  }
  throw InvalidArgument("unknown method: " + name);
}

double RunRecord::gap() const {
  if (!std::isfinite(objective) || !std::isfinite(bound)) return kNaN;
  return (objective - bound) / std::max(std::abs(objective), 1e-9);
}

namespace {

std::string status_name(MipStatus s) {
  switch (s) {
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
  return "error";
}

SddpConfig sddp_config(const SolveOptions& o, bool exact) {
  SddpConfig c;
  c.samples = o.samples;
  c.seed = o.seed;
  c.mip.time_limit = o.time_limit;
  if (exact) {
    c.epsilon = o.epsilon;
    c.exact = true;
  } else {
    c = lower_bound_config(c);
    c.epsilon = o.lb_epsilon;
    c.max_rounds = o.rounds;
  }
  return c;
}

void fill_from(RunRecord& r, const MipSolution& sol) {
  r.status = status_name(sol.status);
  if (sol.has_incumbent()) r.objective = sol.objective;
  r.bound = sol.bound;
}

}  // namespace

RunRecord run_method(const std::string& instance_id, const HdrInstance& inst, Method method,
                     TransformKind transform, const SolveOptions& options) {
  RunRecord r;
  r.instance = instance_id;
  r.method = method;
  r.transform = transform;
  r.seed = options.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    auto tree = build_hdr_tree(inst);
    Msilp m = build_hdr_aggregated(inst, tree);
    AggregationMap agg = build_aggregation(*tree, {transform, options.partial_attrs});
    switch (method) {
      case Method::kExtensive: {
        ExtensiveLayout lay;
        MipOptions mo;
        mo.time_limit = options.time_limit;
        MipSolution sol = branch_and_cut(build_aggregated_extensive_form(m, agg, &lay), nullptr, mo);
        fill_from(r, sol);
        if (sol.has_incumbent()) {
          for (int g = 0; g < agg.num_groups(); ++g) {
            for (int l = 0; l < m.dims().integer; ++l) r.groups.push_back(sol.x[lay.group_col[g] + l]);
          }
        }
        break;
      }
      case Method::kSddp:
      case Method::kSddpLowerBound:
      case Method::kSddpUpperBound: {
        SddpResult res = method == Method::kSddp
                             ? solve_exact(m, agg, sddp_config(options, true))
                             : solve_lower_bound(m, agg, sddp_config(options, false));
        fill_from(r, res.mip);
        r.groups = res.groups;
        r.optimality_cuts = res.stats.optimality_cuts;
        r.feasibility_cuts = res.stats.feasibility_cuts;
        if (method == Method::kSddpLowerBound) {
          r.bound = res.mip.has_incumbent() ? res.mip.objective : res.mip.bound;
        } else if (method == Method::kSddpUpperBound && res.mip.has_incumbent()) {
          r.bound = res.mip.objective;
          r.objective = evaluate_policy(m, agg, res.groups, sddp_config(options, true));
        }
        break;
      }
      case Method::kLdrHistory:
      case Method::kLdrStage:
      case Method::kLdrMarkov: {
        const LdrKind kind = method == Method::kLdrHistory ? LdrKind::kHistory
                             : method == Method::kLdrStage ? LdrKind::kStage
                                                           : LdrKind::kMarkov;
        LdrModel model = build_ldr_model(m, agg, {kind, options.intercept});
        MipOptions mo;
        mo.time_limit = options.time_limit;
        LdrResult res = benders_solve(model, options.ldr_epsilon, mo);
        fill_from(r, res.mip);
        r.optimality_cuts = res.stats.optimality_cuts;
        r.feasibility_cuts = res.stats.feasibility_cuts;
        if (res.mip.has_incumbent()) {
          LdrPolicy pol = extract_policy(m, agg, model, res.mip.x);
          r.groups = std::move(pol.groups);
          r.rules = std::move(pol.rules);
          r.inventories = std::move(pol.state);
        }
        break;
      }
    }
  } catch (const InfeasibleModel& e) {
    r.status = "infeasible";
    r.message = e.what();
  } catch (const InfeasiblePolicy& e) {
    r.status = "infeasible";
    r.message = e.what();
  } catch (const std::exception& e) {
    r.status = "error";
    r.message = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::pair<int, int> int_range(const json& j, const char* key, std::pair<int, int> fallback) {
  if (!j.contains(key)) return fallback;
  return {j.at(key).at(0).get<int>(), j.at(key).at(1).get<int>()};
}

}  // namespace

HdrConfig hdr_config_from_json(const json& j) {
  try {
    HdrConfig c;
    c.cols = value_or(j, "cols", c.cols);
    c.rows = value_or(j, "rows", c.rows);
    c.capacity_pct = value_or(j, "capacity_pct", c.capacity_pct);
    c.modality_type =
        value_or(j, "modality_type", 1) == 2 ? ModalityType::kType2 : ModalityType::kType1;
    c.seed = value_or<std::uint64_t>(j, "seed", c.seed);
    std::tie(c.min_shelters, c.max_shelters) =
        int_range(j, "shelters_per_cell", {c.min_shelters, c.max_shelters});
    std::tie(c.min_dcs, c.max_dcs) = int_range(j, "dcs_per_cell", {c.min_dcs, c.max_dcs});
    if (j.contains("max_demand_range")) {
      c.min_dmax = j.at("max_demand_range").at(0).get<double>();
      c.max_dmax = j.at("max_demand_range").at(1).get<double>();
    }
    if (j.contains("costs")) {
      const json& k = j.at("costs");
      c.costs.holding = value_or(k, "holding", c.costs.holding);
      c.costs.production = value_or(k, "production", c.costs.production);
      c.costs.transport_per_distance =
          value_or(k, "transport_per_distance", c.costs.transport_per_distance);
      c.costs.intensity_factor = value_or(k, "intensity_factor", c.costs.intensity_factor);
      c.costs.shortage = value_or(k, "shortage", c.costs.shortage);
      c.costs.modality_per_unit = value_or(k, "modality_per_unit", c.costs.modality_per_unit);
    }
    if (c.rows < 2 || c.cols < 1 || !(c.capacity_pct > 0.0 && c.capacity_pct <= 1.0)) {
      throw ParseError("generator settings out of range");
    }
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad generator settings: ") + e.what());
  }
}

BenchConfig bench_config_from_json(const json& j, const std::string& base_dir) {
  BenchConfig c;
  try {
    for (const json& inst : j.at("instances")) {
      BenchInstance bi;
      if (inst.contains("generate")) {
        bi.instance = generate_instance(hdr_config_from_json(inst.at("generate")));
        bi.id = value_or<std::string>(inst, "id", fmt::format("s{}", bi.instance.config.seed));
      } else {
        std::filesystem::path file = inst.at("file").get<std::string>();
        if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
        bi.instance = read_instance(file.string());
        bi.id = value_or<std::string>(inst, "id", file.stem().string());
      }
      c.instances.push_back(std::move(bi));
    }
    for (const json& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    for (const json& t : j.at("transforms")) {
      c.transforms.push_back(parse_transform(t.get<std::string>()));
    }
    if (j.contains("options")) {
      const json& o = j.at("options");
      SolveOptions& s = c.options;
      s.epsilon = value_or(o, "eps", s.epsilon);
      s.lb_epsilon = value_or(o, "lb_eps", s.lb_epsilon);
      s.samples = value_or(o, "k", s.samples);
      s.rounds = value_or(o, "rounds", s.rounds);
      s.seed = value_or<std::uint64_t>(o, "seed", s.seed);
      if (o.contains("time_limit") && !o.at("time_limit").is_null()) {
        s.time_limit = o.at("time_limit").get<double>();
      }
      s.ldr_epsilon = value_or(o, "ldr_eps", s.ldr_epsilon);
      s.intercept = value_or(o, "intercept", s.intercept);
    }
    c.jobs = value_or(j, "jobs", 1);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad bench config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("bad bench config: ") + e.what());
  }
  if (c.jobs < 1) throw ParseError("jobs must be positive");
  return c;
}

BenchConfig read_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return bench_config_from_json(j, std::filesystem::path(path).parent_path().string());
}

std::vector<RunRecord> bench(const BenchConfig& config,
                             const std::function<void(const RunRecord&)>& on_record) {
  struct Cell {
    const BenchInstance* inst;
    Method method;
    TransformKind transform;
  };
  std::vector<Cell> cells;
  for (const BenchInstance& bi : config.instances) {
    for (Method m : config.methods) {
      for (TransformKind t : config.transforms) cells.push_back({&bi, m, t});
    }
  }
  std::vector<RunRecord> out;
  std::deque<std::future<RunRecord>> running;
  auto finish_front = [&] {
    out.push_back(running.front().get());
    running.pop_front();
    if (on_record) on_record(out.back());
  };
  for (const Cell& c : cells) {
    if (static_cast<int>(running.size()) >= config.jobs) finish_front();
    running.push_back(std::async(config.jobs > 1 ? std::launch::async : std::launch::deferred,
                                 [&config, c] {
                                   return run_method(c.inst->id, c.inst->instance, c.method,
                                                     c.transform, config.options);
                                 }));
  }
  while (!running.empty()) finish_front();
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  return fields;
}

double parse_number(const std::string& s) {
  if (s.empty()) return kNaN;
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("not a number: " + s);
  }
}

// Percentages within 1e-6 of zero are solver noise; print them as 0.
std::string percent_text(double v) { return format_number(std::abs(v) < 1e-6 ? 0.0 : v); }

std::string closed_text(std::optional<double> v) { return v ? percent_text(*v) : "n/a"; }

}  // namespace

void write_report_header(std::ostream& out) {
  out << "instance,method,transform,status,objective,bound,gap,gap_closed,optimality_cuts,"
         "feasibility_cuts,seed,message\n";
}

void write_report_row(std::ostream& out, const RunRecord& r, std::optional<double> closed) {
  out << csv_field(r.instance) << ',' << to_string(r.method) << ',' << to_string(r.transform)
      << ',' << r.status << ',' << format_number(r.objective) << ',' << format_number(r.bound)
      << ',' << format_number(r.gap()) << ',' << closed_text(closed) << ','
      << r.optimality_cuts << ',' << r.feasibility_cuts << ',' << r.seed << ','
      << csv_field(r.message) << '\n';
}

void write_report(std::ostream& out, const std::vector<RunRecord>& records) {
  std::map<std::tuple<std::string, Method, TransformKind>, double> obj;
  for (const RunRecord& r : records) {
    if (r.status == "optimal") obj[{r.instance, r.method, r.transform}] = r.objective;
  }
  write_report_header(out);
  for (const RunRecord& r : records) {
    std::optional<double> closed;
    auto hn = obj.find({r.instance, r.method, TransformKind::kHN});
    auto fh = obj.find({r.instance, r.method, TransformKind::kFH});
    if (r.status == "optimal" && hn != obj.end() && fh != obj.end()) {
      closed = gap_closed(hn->second, r.objective, fh->second);
    }
    write_report_row(out, r, closed);
  }
}

void write_timing(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "instance,method,transform,seconds\n";
  for (const RunRecord& r : records) {
    out << csv_field(r.instance) << ',' << to_string(r.method) << ',' << to_string(r.transform)
        << ',' << format_number(r.seconds) << '\n';
  }
}

std::vector<ReportRow> read_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty report");
  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* key : {"instance", "method", "transform", "status", "objective", "bound"}) {
    if (!col.count(key)) throw ParseError(std::string("report lacks column ") + key);
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size()) throw ParseError("ragged report line: " + line);
    ReportRow r;
    r.instance = f[col["instance"]];
    r.method = f[col["method"]];
    r.transform = f[col["transform"]];
    r.status = f[col["status"]];
    r.objective = parse_number(f[col["objective"]]);
    r.bound = parse_number(f[col["bound"]]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::map<std::tuple<std::string, std::string, std::string>, double> obj;
  for (const ReportRow& r : rows) {
    if (r.status == "optimal") obj[{r.instance, r.method, r.transform}] = r.objective;
  }
  struct Acc {
    int runs = 0, solved = 0, closed_n = 0, diff_n = 0;
    double objective = 0.0, closed = 0.0, diff = 0.0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  std::vector<std::pair<std::string, std::string>> order;
  for (const ReportRow& r : rows) {
    auto key = std::make_pair(r.method, r.transform);
    if (!acc.count(key)) order.push_back(key);
    Acc& a = acc[key];
    ++a.runs;
    if (r.status != "optimal") continue;
    ++a.solved;
    a.objective += r.objective;
    auto hn = obj.find({r.instance, r.method, "hn"});
    auto fh = obj.find({r.instance, r.method, "fh"});
    if (hn != obj.end() && fh != obj.end()) {
      if (auto c = gap_closed(hn->second, r.objective, fh->second)) {
        a.closed += *c;
        ++a.closed_n;
      }
    }
    auto ex = obj.find({r.instance, "ex", r.transform});
    if (ex != obj.end() && ex->second != 0.0) {
      a.diff += relative_difference(ex->second, r.objective);
      ++a.diff_n;
    }
  }
  out << "method,transform,runs,solved,mean_objective,mean_gap_closed,mean_relative_difference\n";
  for (const auto& key : order) {
    const Acc& a = acc[key];
    out << key.first << ',' << key.second << ',' << a.runs << ',' << a.solved << ','
        << format_number(a.solved ? a.objective / a.solved : kNaN) << ','
        << (a.closed_n ? percent_text(a.closed / a.closed_n) : "n/a") << ','
        << (a.diff_n ? percent_text(a.diff / a.diff_n) : "n/a") << '\n';
  }
}

}  // namespace mcagg
