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

// Command-line entry point: instance generation, solving, policy evaluation
// and benchmark reports.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mcagg/aggregate.h"
#include "mcagg/bench.h"
#include "mcagg/errors.h"
#include "mcagg/hdr.h"
#include "mcagg/sddp.h"

namespace {

using mcagg::Method;
using mcagg::TransformKind;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;

std::string default_output_dir() {
  const char* dir = std::getenv("MCAGG_OUTPUT_DIR");
  return dir != nullptr && *dir != '\0' ? dir : ".";
}

std::filesystem::path output_path(const std::string& flag, const std::string& dir,
                                  const std::string& fallback) {
  std::filesystem::path p =
      flag.empty() ? std::filesystem::path(dir) / fallback : std::filesystem::path(flag);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p;
}

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json solution_json(const mcagg::RunRecord& r, const mcagg::HdrInstance& inst,
                   const mcagg::SolveOptions& options) {
  json j;
  j["instance"] = r.instance;
  j["method"] = mcagg::to_string(r.method);
  j["transform"] = mcagg::to_string(r.transform);
  j["status"] = r.status;
  j["objective"] = number_or_null(r.objective);
  j["bound"] = number_or_null(r.bound);
  j["gap"] = number_or_null(r.gap());
  j["optimality_cuts"] = r.optimality_cuts;
  j["feasibility_cuts"] = r.feasibility_cuts;
  j["seed"] = r.seed;
  j["seconds"] = r.seconds;
  if (!r.message.empty()) j["message"] = r.message;
  j["groups"] = json::array();
  if (!r.groups.empty()) {
    auto tree = mcagg::build_hdr_tree(inst);
    mcagg::AggregationMap agg =
        mcagg::build_aggregation(*tree, {r.transform, options.partial_attrs});
    const size_t width = r.groups.size() / agg.num_groups();
    for (int g = 0; g < agg.num_groups(); ++g) {
      j["groups"].push_back({{"stage", agg.group_stage[g]},
                             {"key", agg.group_key[g]},
                             {"values", std::vector<double>(r.groups.begin() + g * width,
                                                            r.groups.begin() + (g + 1) * width)}});
    }
  }
  if (!r.rules.empty()) j["rules"] = r.rules;
  if (!r.inventories.empty()) j["inventories"] = r.inventories;
  return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mcagg::ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw mcagg::ParseError(path + ": " + e.what());
  }
}

void add_solve_flags(CLI::App* cmd, mcagg::SolveOptions& o, std::string& transform) {
  cmd->add_option("--transform", transform, "hn, ma, mm, pm or fh")
      ->check(CLI::IsMember({"hn", "ma", "mm", "pm", "fh"}));
  cmd->add_option("--pm-attrs", o.partial_attrs, "state attributes kept by pm");
  cmd->add_option("--eps", o.epsilon, "cut violation tolerance of exact SDDP")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lb-eps", o.lb_epsilon, "cut violation tolerance of lower-bound SDDP")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--k", o.samples, "forward samples per pass, 0 for the default")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--rounds", o.rounds, "passes of lower-bound SDDP")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_option("--time-limit", o.time_limit, "seconds per run")->check(CLI::PositiveNumber);
  cmd->add_option("--ldr-eps", o.ldr_epsilon, "cut violation tolerance of decision rules")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-intercept", [&o](std::int64_t) { o.intercept = false; },
                "drop the constant term from decision rule bases");
}

int run_generate(const std::string& config_path, mcagg::HdrConfig cfg, int type,
                 const std::string& out_flag, const std::string& dir) {
  if (!config_path.empty()) {
    cfg = mcagg::hdr_config_from_json(read_json(config_path));
  } else {
    cfg.modality_type = type == 2 ? mcagg::ModalityType::kType2 : mcagg::ModalityType::kType1;
  }
  mcagg::HdrInstance inst = mcagg::generate_instance(cfg);
  const auto path = output_path(out_flag, dir, fmt::format("instance_s{}.json", cfg.seed));
  mcagg::write_instance(inst, path.string());
  std::cout << path.string() << '\n';
  return kExitOk;
}

int run_solve(const std::string& instance_path, const std::string& method,
              const std::string& transform, const mcagg::SolveOptions& options,
              const std::string& out_flag, const std::string& dir) {
  mcagg::HdrInstance inst = mcagg::read_instance(instance_path);
  const std::string id = std::filesystem::path(instance_path).stem().string();
  mcagg::RunRecord r = mcagg::run_method(id, inst, mcagg::parse_method(method),
                                         mcagg::parse_transform(transform), options);
  const auto path =
      output_path(out_flag, dir, fmt::format("{}_{}_{}.json", id, method, transform));
  write_json(solution_json(r, inst, options), path);
  std::cout << fmt::format("{} {} {}: {} objective {} bound {} ({:.2f}s) -> {}\n", id, method,
                           transform, r.status, mcagg::format_number(r.objective),
                           mcagg::format_number(r.bound), r.seconds, path.string());
  if (!r.message.empty()) std::cerr << r.message << '\n';
  return r.status == "optimal" ? kExitOk : kExitPartial;
}

int run_evaluate(const std::string& instance_path, const std::string& solution_path,
                 const mcagg::SolveOptions& options) {
  mcagg::HdrInstance inst = mcagg::read_instance(instance_path);
  json sol = read_json(solution_path);
  std::vector<double> groups;
  TransformKind transform;
  try {
    transform = mcagg::parse_transform(sol.at("transform").get<std::string>());
    for (const json& g : sol.at("groups")) {
      for (const json& v : g.at("values")) groups.push_back(v.get<double>());
    }
  } catch (const json::exception& e) {
    throw mcagg::ParseError(solution_path + ": " + e.what());
  } catch (const mcagg::InvalidArgument& e) {
    throw mcagg::ParseError(solution_path + ": " + e.what());
  }
  auto tree = mcagg::build_hdr_tree(inst);
  mcagg::Msilp m = mcagg::build_hdr_aggregated(inst, tree);
  mcagg::AggregationMap agg = mcagg::build_aggregation(*tree, {transform, options.partial_attrs});
  if (groups.size() != static_cast<size_t>(agg.num_groups() * m.dims().integer)) {
    throw mcagg::ParseError(solution_path + ": group values do not match the transform");
  }
  mcagg::SddpConfig cfg;
  cfg.epsilon = options.epsilon;
  cfg.seed = options.seed;
  try {
    const double value = mcagg::evaluate_policy(m, agg, groups, cfg);
    std::cout << mcagg::format_number(value) << '\n';
    return kExitOk;
  } catch (const mcagg::InfeasiblePolicy& e) {
    std::cerr << "infeasible policy: " << e.what() << '\n';
    return kExitPartial;
  }
}

int run_bench(const std::string& config_path, int jobs, const std::string& dir) {
  mcagg::BenchConfig config = mcagg::read_bench_config(config_path);
  if (jobs > 0) config.jobs = jobs;
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  // Rows are flushed as cells finish so a killed run keeps its results.
  std::ofstream partial(base / "report.partial.csv");
  mcagg::write_report_header(partial);
  bool failed = false;
  std::vector<mcagg::RunRecord> records =
      mcagg::bench(config, [&](const mcagg::RunRecord& r) {
        mcagg::write_report_row(partial, r, std::nullopt);
        partial.flush();
        failed = failed || r.status != "optimal";
        std::cerr << fmt::format("{} {} {}: {} {}\n", r.instance, mcagg::to_string(r.method),
                                 mcagg::to_string(r.transform), r.status,
                                 mcagg::format_number(r.objective));
      });
  partial.close();
  {
    std::ofstream report(base / "report.csv");
    mcagg::write_report(report, records);
    std::ofstream timing(base / "timing.csv");
    mcagg::write_timing(timing, records);
  }
  std::filesystem::remove(base / "report.partial.csv");
  std::cout << (base / "report.csv").string() << '\n';
  return failed ? kExitPartial : kExitOk;
}

int run_report(const std::string& report_path, const std::string& out_flag) {
  std::ifstream in(report_path);
  if (!in) throw mcagg::ParseError("cannot open " + report_path);
  std::vector<mcagg::ReportRow> rows = mcagg::read_report(in);
  if (out_flag.empty()) {
    mcagg::write_summary(std::cout, rows);
  } else {
    std::ofstream out(output_path(out_flag, ".", ""));
    mcagg::write_summary(out, rows);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-tree aggregation solvers for multistage stochastic integer programs"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string dir = default_output_dir();
  app.add_option("--output-dir", dir, "output directory (default $MCAGG_OUTPUT_DIR or .)");

  mcagg::HdrConfig gen;
  int type = 1;
  std::string gen_config, gen_out;
  CLI::App* generate = app.add_subcommand("generate", "generate a relief instance");
  generate->add_option("--config", gen_config, "generator settings as JSON");
  generate->add_option("--cols", gen.cols, "land cells")->check(CLI::PositiveNumber);
  generate->add_option("--rows", gen.rows, "grid rows, the horizon is rows - 1")
      ->check(CLI::Range(2, 64));
  generate->add_option("--capacity", gen.capacity_pct, "initial capacity fraction")
      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--type", type, "modality type")->check(CLI::IsMember({1, 2}));
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--min-shelters", gen.min_shelters)->check(CLI::PositiveNumber);
  generate->add_option("--max-shelters", gen.max_shelters)->check(CLI::PositiveNumber);
  generate->add_option("--min-dcs", gen.min_dcs)->check(CLI::PositiveNumber);
  generate->add_option("--max-dcs", gen.max_dcs)->check(CLI::PositiveNumber);
  generate->add_option("--modality-cost", gen.costs.modality_per_unit)
      ->check(CLI::NonNegativeNumber);
  generate->add_option("-o,--out", gen_out, "instance file");

  mcagg::SolveOptions options;
  std::string transform = "fh", method = "sddp", instance_path, solve_out;
  CLI::App* solve = app.add_subcommand("solve", "solve an instance and write a solution file");
  solve->add_option("instance", instance_path, "instance file")->required();
  solve->add_option("--method", method, "ex, sddp, sddp-lb, sddp-ub, ldr-th, ldr-t or ldr-m")
      ->check(CLI::IsMember({"ex", "sddp", "sddp-lb", "sddp-ub", "ldr-th", "ldr-t", "ldr-m"}));
  add_solve_flags(solve, options, transform);
  solve->add_option("-o,--out", solve_out, "solution file");

  std::string solution_path;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "expected cost of the group values in a solution file");
  evaluate->add_option("instance", instance_path, "instance file")->required();
  evaluate->add_option("solution", solution_path, "solution file")->required();
  evaluate->add_option("--pm-attrs", options.partial_attrs, "state attributes kept by pm");
  evaluate->add_option("--eps", options.epsilon, "cut violation tolerance")
      ->check(CLI::PositiveNumber);

  std::string bench_config;
  int jobs = 0;
  CLI::App* bench = app.add_subcommand("bench", "run every instance, method and transform");
  bench->add_option("--config", bench_config, "bench config JSON")->required();
  bench->add_option("--out", dir, "report directory");
  bench->add_option("--jobs", jobs, "concurrent cells, overrides the config")
      ->check(CLI::PositiveNumber);

  std::string report_path, report_out;
  CLI::App* report = app.add_subcommand("report", "summarize a bench report");
  report->add_option("report", report_path, "report CSV")->required();
  report->add_option("-o,--out", report_out, "summary CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    if (*generate) return run_generate(gen_config, gen, type, gen_out, dir);
    if (*solve) return run_solve(instance_path, method, transform, options, solve_out, dir);
    if (*evaluate) return run_evaluate(instance_path, solution_path, options);
    if (*bench) return run_bench(bench_config, jobs, dir);
    if (*report) return run_report(report_path, report_out);
  } catch (const mcagg::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mcagg::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitConfig;
}
