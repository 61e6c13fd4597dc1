// Copyright 2026 The PaQL Engine Authors
//
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

// Benchmark harness: runs a query workload under Direct and SketchRefine
// across scale, tau or partitioning-coverage sweeps.

#ifndef PAQL_BENCH_HPP_
#define PAQL_BENCH_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "paql/evaluator.hpp"

namespace paql {

enum class Sweep { kScale, kTau, kCoverage };

std::string_view to_string(Sweep sweep);

struct BenchQuery {
  std::string name;
  PackageQuery query;
};

struct BenchSpec {
  std::vector<BenchQuery> queries;
  std::vector<Method> methods = {Method::kDirect, Method::kSketchRefine};
  Sweep sweep = Sweep::kScale;
  // Keep fractions for the scale sweep.
  std::vector<double> scales = {1.0};
  // Tau as a fraction of the (scaled) relation size, for the tau sweep.
  std::vector<double> tau_fractions = {0.1};
  // |partitioning attrs| / |query attrs| points, for the coverage sweep.
  std::vector<double> coverages = {1.0};
  // Partitioning used by the scale sweep when given; otherwise one is built
  // from the parameters below.
  std::optional<Partitioning> partitioning;
  std::vector<std::string> attrs;  // default: all numeric attributes
  std::optional<std::size_t> tau;  // absolute; default tau_fractions[0] * n
  double omega = kNoRadiusLimit;
  std::optional<double> epsilon;  // overrides omega
  std::size_t repetitions = 10;
  EvalConfig config;
};

struct BenchRow {
  std::string query;
  Method method = Method::kDirect;
  // Swept value: keep fraction, tau fraction or coverage.
  double scale = 1.0;
  std::size_t runs = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  // Only over runs where both methods were feasible; SketchRefine rows only.
  std::optional<double> mean_ratio;
  std::optional<double> median_ratio;
  // Runs that were not Feasible, including crashes.
  std::size_t failures = 0;
  std::vector<std::string> errors;
  // Coverage sweep: mean time over the mean time at coverage 1.
  std::optional<double> time_ratio;
};

struct BenchQuerySummary {
  std::string query;
  std::optional<double> mean_ratio;
  std::optional<double> median_ratio;
};

struct BenchReport {
  Sweep sweep = Sweep::kScale;
  std::vector<BenchRow> rows;
  std::vector<BenchQuerySummary> summaries;
};

// Throws ValidationError for an empty workload or method list and for
// invalid sweep values. Run failures are recorded, never thrown.
BenchReport run_bench(const Relation& relation, const BenchSpec& spec);

std::string to_json(const BenchReport& report);
// Columns: query, method, scale, mean_ms, median_ms, mean_ratio,
// median_ratio, failures.
void write_csv(const BenchReport& report, std::ostream& out);

double median(std::vector<double> values);

}  // namespace paql

#endif  // PAQL_BENCH_HPP_
