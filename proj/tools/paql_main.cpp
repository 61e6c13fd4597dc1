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

// paql: partition | run | bench | gen
//
// Exit codes: 0 success (run: Feasible), 2 Infeasible, 3 TimeLimit,
// 1 runtime error, 64 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "paql/bench.hpp"
#include "paql/error.hpp"
#include "paql/evaluator.hpp"
#include "paql/generator.hpp"
#include "paql/partitioner.hpp"
#include "paql/query.hpp"
#include "paql/relation.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeLimit = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  double time_limit_s = 3600.0;
  std::optional<std::size_t> backtrack_limit;
  std::string hybrid = "on";
  std::optional<std::size_t> recursion_threshold;
  double mip_gap = 0.0;

  paql::EvalConfig config() const {
    paql::EvalConfig c;
    c.seed = seed;
    c.solver.seed = seed;
    c.solver.time_limit_s = time_limit_s;
    c.solver.relative_gap = mip_gap;
    c.backtrack_limit = backtrack_limit;
    c.hybrid_sketch = hybrid == "on";
    c.recursion_threshold = recursion_threshold;
    return c;
  }
};

double parse_omega(const std::string& text) {
  if (text == "inf" || text == "infinity") return paql::kNoRadiusLimit;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--omega expects a number or 'inf', got '" + text + "'");
  }
}

paql::Direction parse_direction(const std::string& text) {
  return text == "min" ? paql::Direction::kMinimize : paql::Direction::kMaximize;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw paql::IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw paql::IoError("failed writing " + path);
}

// ---------------------------------------------------------------------------

struct PartitionArgs {
  std::string input;
  std::vector<std::string> attrs;
  std::size_t tau = 0;
  std::optional<double> epsilon;
  std::string direction = "max";
  std::string omega = "inf";
  std::string out;
};

int cmd_partition(const PartitionArgs& a) {
  const paql::Relation rel = paql::load_csv(a.input);
  std::vector<std::string> attrs = a.attrs;
  if (attrs.empty()) {
    for (const paql::Attribute& attr : rel.schema().attributes()) {
      if (attr.kind == paql::AttributeKind::kNumeric) attrs.push_back(attr.name);
    }
  }
  const paql::Partitioning p =
      a.epsilon ? paql::partition_for_epsilon(rel, attrs, a.tau, *a.epsilon,
                                              parse_direction(a.direction))
                : paql::partition(rel, {attrs, a.tau, parse_omega(a.omega)});
  if (a.out.empty()) {
    std::cout << paql::to_json(p) << '\n';
  } else {
    paql::save_partitioning(p, a.out);
    std::cerr << "partitioned " << rel.size() << " tuples into "
              << p.num_groups() << " groups (" << p.degenerate.size()
              << " degenerate)\n";
  }
  return 0;
}

struct RunArgs {
  std::string method = "direct";
  std::string query;
  std::string input;
  std::string partitioning;
  std::string solver = "bnb";
  std::string out;
};

int cmd_run(const RunArgs& a, const Globals& g) {
  if (a.method == "sketchrefine" && a.partitioning.empty()) {
    throw UsageError("--method sketchrefine requires --partitioning");
  }
  const paql::Relation rel = paql::load_csv(a.input);
  const paql::PackageQuery q = paql::parse_file(a.query);
  const auto solver = paql::make_solver(a.solver);
  paql::EvalConfig config = g.config();
  config.solver_impl = solver.get();
  const paql::EvalReport report =
      a.method == "direct"
          ? paql::eval_direct(q, rel, config)
          : paql::eval_sketchrefine(q, rel,
                                    paql::load_partitioning(a.partitioning),
                                    config);
  const std::string json = paql::to_json(report);
  if (a.out.empty()) {
    std::cout << json << '\n';
  } else {
    write_text(a.out, json + "\n");
  }
  switch (report.status) {
    case paql::EvalStatus::kFeasible: return 0;
    case paql::EvalStatus::kInfeasible: return kExitInfeasible;
    case paql::EvalStatus::kTimeLimit: return kExitTimeLimit;
  }
  return kExitError;
}

struct BenchArgs {
  std::string input;
  std::vector<std::string> queries;
  std::vector<std::string> methods = {"direct", "sketchrefine"};
  std::string sweep = "scale";
  std::vector<double> scales = {1.0};
  std::vector<double> tau_fractions = {0.1};
  std::vector<double> coverages = {0.5, 1.0, 2.0};
  std::string partitioning;
  std::vector<std::string> attrs;
  std::optional<std::size_t> tau;
  std::string omega = "inf";
  std::optional<double> epsilon;
  std::size_t repetitions = 10;
  std::string out_json;
  std::string out_csv;
};

int cmd_bench(const BenchArgs& a, const Globals& g) {
  const paql::Relation rel = paql::load_csv(a.input);
  paql::BenchSpec spec;
  for (const std::string& path : a.queries) {
    spec.queries.push_back(
        {std::filesystem::path(path).stem().string(), paql::parse_file(path)});
  }
  spec.methods.clear();
  for (const std::string& m : a.methods) {
    spec.methods.push_back(m == "direct" ? paql::Method::kDirect
                                         : paql::Method::kSketchRefine);
  }
  spec.sweep = a.sweep == "tau"        ? paql::Sweep::kTau
               : a.sweep == "coverage" ? paql::Sweep::kCoverage
                                       : paql::Sweep::kScale;
  spec.scales = a.scales;
  spec.tau_fractions = a.tau_fractions;
  spec.coverages = a.coverages;
  if (!a.partitioning.empty()) {
    spec.partitioning = paql::load_partitioning(a.partitioning);
  }
  spec.attrs = a.attrs;
  spec.tau = a.tau;
  spec.omega = parse_omega(a.omega);
  spec.epsilon = a.epsilon;
  spec.repetitions = a.repetitions;
  spec.config = g.config();

  const paql::BenchReport report = paql::run_bench(rel, spec);
  const std::string json = paql::to_json(report);
  if (a.out_json.empty()) {
    std::cout << json << '\n';
  } else {
    write_text(a.out_json, json + "\n");
  }
  if (!a.out_csv.empty()) {
    std::ofstream csv(a.out_csv, std::ios::binary);
    if (!csv) throw paql::IoError("cannot open " + a.out_csv + " for writing");
    paql::write_csv(report, csv);
  } else if (!a.out_json.empty()) {
    paql::write_csv(report, std::cout);
  }
  return 0;
}

// The relation and query of a raw ILP, as CSV and .paql.
void write_ilp_pair(const paql::RawIlp& ilp, const std::string& csv,
                    const std::string& query) {
  const auto [rel, q] = paql::ilp_to_paql(ilp);
  paql::save_csv(rel, csv);
  write_text(query, paql::to_paql(q) + "\n");
}

struct GenArgs {
  std::size_t rows = 1000;
  std::size_t cols = 4;
  std::string dist = "uniform";
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> clamp_min;
  std::string name = "synthetic";
  std::string out;
  std::size_t queries = 0;
  std::string workload_dir;
  std::size_t min_size = 5;
  std::size_t max_size = 15;
  std::size_t max_constraints = 2;
  std::int64_t repeat = 0;
  std::string from_ilp;
  std::string query_out;
  std::size_t ilp_n = 0;
  std::size_t ilp_k = 3;
  std::string ilp_out;
};

int cmd_gen(const GenArgs& a, const Globals& g) {
  if (a.ilp_n > 0) {
    if (a.ilp_out.empty()) throw UsageError("--ilp-n needs --ilp-out");
    if (!a.from_ilp.empty()) {
      throw UsageError("--ilp-n and --from-ilp are exclusive");
    }
    paql::RawIlpParams params;
    params.n = a.ilp_n;
    params.k = a.ilp_k;
    params.seed = g.seed;
    const paql::RawIlp ilp = paql::generate_raw_ilp(params);
    write_text(a.ilp_out, paql::to_json(ilp) + "\n");
    if (a.out.empty() != a.query_out.empty()) {
      throw UsageError("--out and --query-out go together");
    }
    if (!a.out.empty()) write_ilp_pair(ilp, a.out, a.query_out);
    return 0;
  }
  if (!a.from_ilp.empty()) {
    if (a.out.empty() || a.query_out.empty()) {
      throw UsageError("--from-ilp needs --out and --query-out");
    }
    write_ilp_pair(paql::load_raw_ilp(a.from_ilp), a.out, a.query_out);
    return 0;
  }
  if (a.out.empty()) throw UsageError("gen needs --out");
  paql::DataParams params;
  params.name = a.name;
  params.rows = a.rows;
  params.cols = a.cols;
  params.distribution =
      a.dist == "normal" ? paql::Distribution::kNormal : paql::Distribution::kUniform;
  params.lo = a.lo;
  params.hi = a.hi;
  params.clamp_min = a.clamp_min;
  params.seed = g.seed;
  const paql::Relation rel = paql::generate_relation(params);
  paql::save_csv(rel, a.out);

  if (a.queries > 0) {
    if (a.workload_dir.empty()) throw UsageError("--queries needs --workload-dir");
    paql::WorkloadParams wp;
    wp.queries = a.queries;
    wp.min_expected_size = a.min_size;
    wp.max_expected_size = a.max_size;
    wp.max_constraints = a.max_constraints;
    wp.repeat = a.repeat;
    wp.seed = g.seed;
    const auto workload = paql::generate_workload(rel, wp);
    std::filesystem::create_directories(a.workload_dir);
    for (std::size_t i = 0; i < workload.size(); ++i) {
      const auto path = std::filesystem::path(a.workload_dir) /
                        ("q" + std::to_string(i + 1) + ".paql");
      write_text(path.string(), paql::to_paql(workload[i]) + "\n");
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Package query evaluation with Direct and SketchRefine"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for all randomized behavior");
  app.add_option("--time-limit-s", g.time_limit_s,
                 "Wall-clock budget per evaluation")
      ->check(CLI::PositiveNumber);
  app.add_option("--backtrack-limit", g.backtrack_limit,
                 "Maximum refine solves (default 10 x groups)");
  app.add_option("--hybrid-sketch", g.hybrid, "Hybrid sketch fallback")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--recursion-threshold", g.recursion_threshold,
                 "Subproblem size above which SketchRefine recurses")
      ->check(CLI::PositiveNumber);
  app.add_option("--mip-gap", g.mip_gap,
                 "Relative optimality gap for ILP solves (0 = exact)")
      ->check(CLI::NonNegativeNumber);

  PartitionArgs pa;
  CLI::App* partition = app.add_subcommand("partition", "Partition a dataset");
  partition->add_option("--input", pa.input, "CSV file")->required();
  partition->add_option("--attrs", pa.attrs, "Partitioning attributes")
      ->delimiter(',');
  partition->add_option("--tau", pa.tau, "Size threshold")
      ->required()
      ->check(CLI::PositiveNumber);
  partition->add_option("--epsilon", pa.epsilon,
                        "Approximation parameter; derives the radius limit")
      ->check(CLI::NonNegativeNumber);
  partition->add_option("--direction", pa.direction, "Objective direction")
      ->check(CLI::IsMember({"min", "max"}));
  partition->add_option("--omega", pa.omega, "Radius limit or 'inf'");
  partition->add_option("--out", pa.out, "Output JSON file");

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "Evaluate one query");
  run->add_option("--method", ra.method)
      ->check(CLI::IsMember({"direct", "sketchrefine"}));
  run->add_option("--query", ra.query, ".paql file")->required();
  run->add_option("--input", ra.input, "CSV file")->required();
  run->add_option("--partitioning", ra.partitioning, "Partitioning JSON");
  run->add_option("--solver", ra.solver)
      ->check(CLI::IsMember({"bnb", "branch-and-bound", "brute-force"}));
  run->add_option("--out", ra.out, "Write the report here instead of stdout");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Benchmark a workload");
  bench->add_option("--input", ba.input, "CSV file")->required();
  bench->add_option("--queries", ba.queries, ".paql files")->required();
  bench->add_option("--methods", ba.methods)
      ->delimiter(',')
      ->check(CLI::IsMember({"direct", "sketchrefine"}));
  bench->add_option("--sweep", ba.sweep)
      ->check(CLI::IsMember({"scale", "tau", "coverage"}));
  bench->add_option("--scales", ba.scales, "Keep fractions")->delimiter(',');
  bench->add_option("--tau-fractions", ba.tau_fractions, "Tau / n")
      ->delimiter(',');
  bench->add_option("--coverages", ba.coverages)->delimiter(',');
  bench->add_option("--partitioning", ba.partitioning, "Partitioning JSON");
  bench->add_option("--attrs", ba.attrs)->delimiter(',');
  bench->add_option("--tau", ba.tau)->check(CLI::PositiveNumber);
  bench->add_option("--omega", ba.omega);
  bench->add_option("--epsilon", ba.epsilon)->check(CLI::NonNegativeNumber);
  bench->add_option("--repetitions", ba.repetitions)->check(CLI::PositiveNumber);
  bench->add_option("--out-json", ba.out_json);
  bench->add_option("--out-csv", ba.out_csv);

  GenArgs ga;
  CLI::App* gen = app.add_subcommand("gen", "Generate data and workloads");
  gen->add_option("--rows", ga.rows)->check(CLI::PositiveNumber);
  gen->add_option("--cols", ga.cols)->check(CLI::PositiveNumber);
  gen->add_option("--dist", ga.dist)->check(CLI::IsMember({"uniform", "normal"}));
  gen->add_option("--lo", ga.lo, "Uniform low end or normal mean");
  gen->add_option("--hi", ga.hi, "Uniform high end or normal deviation");
  gen->add_option("--clamp-min", ga.clamp_min);
  gen->add_option("--name", ga.name, "Relation name");
  gen->add_option("--out", ga.out, "CSV output");
  gen->add_option("--queries", ga.queries, "Workload size");
  gen->add_option("--workload-dir", ga.workload_dir);
  gen->add_option("--min-size", ga.min_size)->check(CLI::PositiveNumber);
  gen->add_option("--max-size", ga.max_size)->check(CLI::PositiveNumber);
  gen->add_option("--max-constraints", ga.max_constraints)
      ->check(CLI::PositiveNumber);
  gen->add_option("--repeat", ga.repeat)->check(CLI::NonNegativeNumber);
  gen->add_option("--from-ilp", ga.from_ilp, "Raw ILP JSON");
  gen->add_option("--query-out", ga.query_out, ".paql output for ILP pairs");
  gen->add_option("--ilp-n", ga.ilp_n, "Variables of a random raw ILP");
  gen->add_option("--ilp-k", ga.ilp_k, "Constraints of a random raw ILP")
      ->check(CLI::PositiveNumber);
  gen->add_option("--ilp-out", ga.ilp_out, "Raw ILP JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*partition) return cmd_partition(pa);
    if (*run) return cmd_run(ra, g);
    if (*bench) return cmd_bench(ba, g);
    if (*gen) return cmd_gen(ga, g);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const paql::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
