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

// Experiment plumbing: policy-quality metrics, run records, the benchmark
// runner and CSV reports.

#ifndef MCAGG_BENCH_H_
#define MCAGG_BENCH_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcagg/aggregate.h"
#include "mcagg/hdr.h"
#include "mcagg/ldr.h"
#include "mcagg/sddp.h"

namespace mcagg {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Percentage of the HN-FH gap closed by objective obj; nothing when the gap
// is degenerate (|hn - fh| <= 1e-9 max(1, |hn|)).
std::optional<double> gap_closed(double obj_hn, double obj, double obj_fh);

// 100 |ref - obj| / ref. Throws InvalidArgument when ref is zero.
double relative_difference(double obj_ref, double obj);

// Six significant digits, "inf"/"-inf" for infinities, empty for NaN.
std::string format_number(double v);

enum class Method { kExtensive, kSddp, kSddpLowerBound, kSddpUpperBound, kLdrHistory, kLdrStage,
                    kLdrMarkov };

const char* to_string(Method m);
// Accepts ex, sddp, sddp-lb, sddp-ub, ldr-th, ldr-t, ldr-m. Throws
// InvalidArgument.
Method parse_method(const std::string& name);

struct SolveOptions {
  double epsilon = 1e-7;       // SDDP cut tolerance in exact mode
  double lb_epsilon = 0.1;     // SDDP cut tolerance in lower-bound mode
  int samples = 0;             // SDDP paths per round, 0 selects min(20, leaves)
  int rounds = 3;              // lower-bound mode passes
  std::uint64_t seed = 1;
  double time_limit = kInf;    // seconds per run
  double ldr_epsilon = 1e-6;
  bool intercept = true;
  std::vector<int> partial_attrs = {kAttrIntensity};
};

struct RunRecord {
  std::string instance;
  Method method = Method::kExtensive;
  TransformKind transform = TransformKind::kFH;
  std::string status;  // optimal, time_limit, infeasible, error
  double objective = kNaN;
  double bound = kNaN;
  std::int64_t optimality_cuts = 0;
  std::int64_t feasibility_cuts = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::string message;
  std::vector<double> groups;  // integer values per group when available
  std::vector<double> rules;   // decision rule coefficients when available
  std::vector<std::vector<double>> inventories;  // per node, decision rules only

  // (objective - bound) / max(|objective|, 1e-9), NaN when either is missing.
  double gap() const;
};

// Runs one method on one instance. Errors are reported in the record.
RunRecord run_method(const std::string& instance_id, const HdrInstance& inst, Method method,
                     TransformKind transform, const SolveOptions& options);

struct BenchInstance {
  std::string id;
  HdrInstance instance;
};

struct BenchConfig {
  std::vector<BenchInstance> instances;
  std::vector<Method> methods;
  std::vector<TransformKind> transforms;
  SolveOptions options;
  int jobs = 1;
};

// Reads a config object:
//   {"instances": [{"id": "...", "file": "x.json"} | {"id": "...",
//    "generate": {"cols": 2, "rows": 4, "seed": 1, ...}}],
//    "methods": ["ex", ...], "transforms": ["hn", ...],
//    "options": {"eps": ..., "k": ..., "seed": ..., "time_limit": ...,
//                "rounds": ..., "ldr_eps": ..., "intercept": true},
//    "jobs": 1}
// Relative file names are resolved against base_dir. Throws ParseError.
BenchConfig bench_config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
BenchConfig read_bench_config(const std::string& path);

// Generator settings with defaults for missing keys. Throws ParseError.
HdrConfig hdr_config_from_json(const nlohmann::json& j);

// Runs every (instance, method, transform) cell, up to jobs at a time, and
// returns the records in cell order. Each record is passed to on_record in
// cell order as soon as it and its predecessors are done.
std::vector<RunRecord> bench(const BenchConfig& config,
                             const std::function<void(const RunRecord&)>& on_record = {});

// Deterministic report: fixed columns, no timings. gap_closed is computed
// against the hn and fh rows of the same instance and method.
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const RunRecord& r, std::optional<double> closed);
void write_report(std::ostream& out, const std::vector<RunRecord>& records);
void write_timing(std::ostream& out, const std::vector<RunRecord>& records);

// Per (method, transform) averages over a report: objective, gap closed and
// relative difference to the ex row of the same instance and transform.
struct ReportRow {
  std::string instance, method, transform, status;
  double objective = kNaN, bound = kNaN;
};
std::vector<ReportRow> read_report(std::istream& in);
void write_summary(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace mcagg

#endif  // MCAGG_BENCH_H_
