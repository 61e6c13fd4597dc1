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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"
#include "paql/bench.hpp"
#include "paql/error.hpp"
#include "paql/evaluator.hpp"
#include "paql/generator.hpp"
#include "paql/partitioner.hpp"

using namespace paql;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("paql_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
};

// Exit status of the CLI invoked with `args`; output goes to `log`.
int cli(const std::string& args, const std::string& log) {
  const std::string cmd =
      std::string(PAQL_CLI) + " " + args + " >" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_SUITE("generator") {

TEST_CASE("same seed, same data and workload") {
  DataParams d;
  d.rows = 500;
  d.seed = 11;
  const Relation a = generate_relation(d);
  const Relation b = generate_relation(d);
  for (std::size_t c = 0; c < 4; ++c) {
    for (TupleId i = 0; i < a.size(); ++i) CHECK(a.numeric(c, i) == b.numeric(c, i));
  }
  d.seed = 12;
  CHECK(generate_relation(d).numeric(0, 0) != a.numeric(0, 0));
  WorkloadParams w;
  w.seed = 3;
  CHECK(generate_workload(a, w) == generate_workload(b, w));
}

TEST_CASE("data respects distribution parameters") {
  DataParams d;
  d.rows = 2000;
  d.cols = 2;
  const std::vector<std::string> attrs = {"attr_1", "attr_2"};
  d.lo = -3;
  d.hi = 4;
  const Relation u = generate_relation(d);
  for (const AttributeStats& s : attribute_stats(u, attrs)) {
    CHECK(s.min >= -3);
    CHECK(s.max < 4);
  }
  d.distribution = Distribution::kNormal;
  d.lo = 0;
  d.hi = 1;
  d.clamp_min = 0.0;
  const Relation n = generate_relation(d);
  for (const AttributeStats& s : attribute_stats(n, attrs)) {
    CHECK(s.min >= 0);
  }
}

TEST_CASE("sum bounds are a range value times the expected size") {
  DataParams d;
  d.rows = 300;
  d.cols = 3;
  d.seed = 8;
  const Relation r = generate_relation(d);
  WorkloadParams w;
  w.queries = 200;
  w.min_expected_size = 5;
  w.max_expected_size = 5;
  w.max_constraints = 2;
  w.seed = 4;
  std::size_t with_free_objective = 0;
  for (const PackageQuery& q : generate_workload(r, w)) {
    REQUIRE(q.objective);
    CHECK(q.global_predicates[0].lhs.kind == AggregateKind::kCountStar);
    CHECK(q.global_predicates[0].bound == 1.0);
    const GlobalOp anchor = q.objective->direction == Direction::kMaximize
                                ? GlobalOp::kLe
                                : GlobalOp::kGe;
    CHECK(q.global_predicates[1].op == anchor);
    bool objective_constrained = false;
    for (std::size_t i = 1; i < q.global_predicates.size(); ++i) {
      const GlobalPredicate& g = q.global_predicates[i];
      CHECK(g.lhs.kind == AggregateKind::kSum);
      CHECK(g.bound >= 0.0);
      CHECK(g.bound <= 5.0);
      objective_constrained |= g.lhs.attribute == q.objective->expr.attribute;
    }
    with_free_objective += !objective_constrained;
    CHECK(validate(q, r.schema()).validated);
  }
  // Three attributes and at most two constraints: always a free one.
  CHECK(with_free_objective == 200);
}

TEST_CASE("invalid parameters throw") {
  DataParams d;
  d.rows = 0;
  CHECK_THROWS_AS(generate_relation(d), ValidationError);
  d.rows = 3;
  d.hi = d.lo;
  CHECK_THROWS_AS(generate_relation(d), ValidationError);
  d.hi = 1;
  const Relation r = generate_relation(d);
  WorkloadParams w;
  w.min_expected_size = 4;
  w.max_expected_size = 2;
  CHECK_THROWS_AS(generate_workload(r, w), ValidationError);
  w.max_expected_size = 4;
  w.repeat = -1;
  CHECK_THROWS_AS(generate_workload(r, w), ValidationError);
  CHECK_THROWS_AS(generate_raw_ilp({0, 2, -5, 5, true, 1}), ValidationError);
  CHECK_THROWS_AS(generate_raw_ilp({3, 2, -5, -1, true, 1}), ValidationError);
}

TEST_CASE("bounded raw ILPs have a positive first row") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    RawIlpParams p;
    p.n = 1 + rng() % 10;
    p.k = 1 + rng() % 4;
    p.seed = rng();
    const RawIlp ilp = generate_raw_ilp(p);
    CHECK(ilp.c[0] >= 0);
    for (std::size_t i = 0; i < p.n; ++i) {
      CHECK(ilp.b[i][0] >= 1);
      CHECK(ilp.a[i] >= -5);
      CHECK(ilp.a[i] <= 5);
      for (double v : ilp.b[i]) CHECK(std::abs(v) <= 5);
    }
    const auto [rel, q] = ilp_to_paql(ilp);
    CHECK(derive_bounds(translate(validate(q, rel.schema()), rel)).bounded());
  }
}

}  // TEST_SUITE

TEST_SUITE("bench") {

TEST_CASE("a small scale sweep reports both methods") {
  DataParams d;
  d.rows = 600;
  d.cols = 3;
  d.seed = 2;
  const Relation r = generate_relation(d);
  WorkloadParams w;
  w.queries = 2;
  w.seed = 9;
  BenchSpec spec;
  int i = 0;
  for (PackageQuery& q : generate_workload(r, w)) {
    spec.queries.push_back({"q" + std::to_string(++i), std::move(q)});
  }
  spec.scales = {0.5, 1.0};
  spec.tau = 60;
  spec.repetitions = 2;
  const BenchReport rep = run_bench(r, spec);
  CHECK(rep.rows.size() == 2 * 2 * 2);
  for (const BenchRow& row : rep.rows) {
    CHECK(row.runs == 2);
    CHECK(row.median_ms >= 0);
    if (row.method == Method::kDirect) CHECK_FALSE(row.median_ratio);
    if (row.median_ratio) CHECK(*row.median_ratio >= 1.0 - 1e-9);
  }
  std::ostringstream csv;
  write_csv(rep, csv);
  std::string header;
  std::getline(std::istringstream(csv.str()) >> std::ws, header);
  CHECK(header ==
        "query,method,scale,mean_ms,median_ms,mean_ratio,median_ratio,failures");
  const auto doc = nlohmann::json::parse(to_json(rep));
  CHECK(doc.at("sweep") == "scale");
  CHECK(doc.at("rows").size() == rep.rows.size());
}

TEST_CASE("no ratio when a method fails") {
  // SketchRefine without the hybrid cannot reach the outlier; Direct can.
  std::vector<Column> cols(1);
  cols[0].numbers = {0, 0, 0, 10, 5, 5, 5, 5};
  const Relation r(Schema("T", {{"v", AttributeKind::kNumeric}}), cols);
  BenchSpec spec;
  spec.queries.push_back(
      {"outlier",
       parse("SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT COUNT(P.*) = 1 "
             "AND SUM(P.v) >= 8 MAXIMIZE SUM(P.v)")});
  spec.repetitions = 3;
  spec.config.hybrid_sketch = false;
  // The outlier 10 shares a group with the zeros.
  spec.partitioning = parse_partitioning(R"({
    "attrs": ["v"], "tau": 4, "omega": "inf",
    "gids": [1, 1, 1, 1, 2, 2, 2, 2],
    "representatives": [[2.5], [5.0]], "radii": [7.5, 0.0], "sizes": [4, 4],
    "degenerate": []
  })");
  const BenchReport rep = run_bench(r, spec);
  REQUIRE(rep.rows.size() == 2);
  for (const BenchRow& row : rep.rows) {
    CHECK_FALSE(row.median_ratio);
    CHECK_FALSE(row.mean_ratio);
    CHECK(row.failures == (row.method == Method::kDirect ? 0u : 3u));
  }
  REQUIRE(rep.summaries.size() == 1);
  CHECK_FALSE(rep.summaries[0].median_ratio);
}

TEST_CASE("invalid specs throw") {
  std::vector<Column> cols(1);
  cols[0].numbers = {1, 2};
  const Relation r(Schema("T", {{"v", AttributeKind::kNumeric}}), cols);
  BenchSpec spec;
  CHECK_THROWS_AS(run_bench(r, spec), ValidationError);
  spec.queries.push_back(
      {"q", parse("SELECT PACKAGE(T) AS P FROM T SUCH THAT COUNT(P.*) <= 1")});
  spec.scales = {0.0};
  CHECK_THROWS_AS(run_bench(r, spec), ValidationError);
  spec.scales = {1.0};
  spec.methods.clear();
  CHECK_THROWS_AS(run_bench(r, spec), ValidationError);
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("gen is deterministic for a seed") {
  TempDir dir("gen");
  const std::string log = dir / "log";
  CHECK(cli("--seed 7 gen --rows 1000 --cols 4 --out " + (dir / "a.csv"), log) == 0);
  CHECK(cli("--seed 7 gen --rows 1000 --cols 4 --out " + (dir / "b.csv"), log) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(load_csv(dir / "a.csv").size() == 1000);
  CHECK(cli("--seed 8 gen --rows 1000 --cols 4 --out " + (dir / "c.csv"), log) == 0);
  CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));

  CHECK(cli("--seed 7 gen --rows 50 --out " + (dir / "d.csv") +
                " --queries 3 --workload-dir " + (dir / "w"),
            log) == 0);
  for (const char* q : {"q1.paql", "q2.paql", "q3.paql"}) {
    CHECK(parse_file(dir / (std::string("w/") + q)).objective);
  }
}

TEST_CASE("gen --from-ilp maps back to the same ILP") {
  TempDir dir("ilp");
  const std::string log = dir / "log";
  const RawIlp ilp = generate_raw_ilp({7, 3, -5, 5, true, 21});
  write(dir / "i.json", to_json(ilp));
  REQUIRE(cli("gen --from-ilp " + (dir / "i.json") + " --out " + (dir / "i.csv") +
                  " --query-out " + (dir / "i.paql"),
              log) == 0);
  const Relation rel = load_csv(dir / "i.csv");
  const IlpModel m = translate(validate(parse_file(dir / "i.paql"), rel.schema()), rel);
  CHECK(m.direction == Direction::kMaximize);
  CHECK(m.objective == ilp.a);
  REQUIRE(m.constraints.size() == ilp.c.size());
  for (std::size_t j = 0; j < ilp.c.size(); ++j) {
    CHECK(m.constraints[j].sense == RowSense::kLe);
    CHECK(m.constraints[j].rhs == ilp.c[j]);
    for (std::size_t i = 0; i < ilp.a.size(); ++i) {
      CHECK(m.constraints[j].coefficients[i] == ilp.b[i][j]);
    }
  }
  for (const Variable& v : m.variables) CHECK_FALSE(v.upper);

  // A random ILP plus its pair in one call.
  REQUIRE(cli("--seed 4 gen --ilp-n 5 --ilp-k 2 --ilp-out " + (dir / "r.json") +
                  " --out " + (dir / "r.csv") + " --query-out " + (dir / "r.paql"),
              log) == 0);
  const RawIlp r = load_raw_ilp(dir / "r.json");
  CHECK(r.a.size() == 5);
  CHECK(r.c.size() == 2);
  CHECK(load_csv(dir / "r.csv").size() == 5);
  CHECK(cli("gen --ilp-n 5", log) == 64);
}

TEST_CASE("partition and run with exit codes") {
  TempDir dir("run");
  const std::string log = dir / "log";
  const std::string csv = dir / "d.csv";
  REQUIRE(cli("--seed 3 gen --rows 400 --cols 2 --out " + csv, log) == 0);
  REQUIRE(cli("partition --input " + csv + " --attrs attr_1,attr_2 --tau 40 --out " +
                  (dir / "p.json"),
              log) == 0);
  const Partitioning p = load_partitioning(dir / "p.json");
  CHECK(check_partitioning(p, load_csv(csv)).empty());
  CHECK(p.tau == 40);

  write(dir / "ok.paql",
        "SELECT PACKAGE(R) AS P FROM synthetic R REPEAT 0 SUCH THAT "
        "COUNT(P.*) BETWEEN 3 AND 6 AND SUM(P.attr_1) <= 2 "
        "MAXIMIZE SUM(P.attr_2)");
  write(dir / "no.paql",
        "SELECT PACKAGE(R) AS P FROM synthetic R REPEAT 0 SUCH THAT "
        "COUNT(P.*) <= 2 AND SUM(P.attr_1) >= 5");

  CHECK(cli("run --method direct --query " + (dir / "ok.paql") + " --input " + csv +
                " --out " + (dir / "r.json"),
            log) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(doc.at("method") == "direct");
  CHECK(doc.at("status") == "Feasible");
  CHECK(doc.at("package").size() >= 3);

  CHECK(cli("run --method sketchrefine --query " + (dir / "ok.paql") +
                " --input " + csv + " --partitioning " + (dir / "p.json"),
            log) == 0);
  CHECK(nlohmann::json::parse(slurp(log)).at("method") == "sketchrefine");
  CHECK(cli("run --method direct --query " + (dir / "no.paql") + " --input " + csv,
            log) == 2);
  CHECK(nlohmann::json::parse(slurp(log)).at("status") == "Infeasible");
  CHECK(cli("--hybrid-sketch off run --method sketchrefine --query " +
                (dir / "no.paql") + " --input " + csv + " --partitioning " +
                (dir / "p.json"),
            log) == 2);

  // A budget too small for anything.
  REQUIRE(cli("--seed 3 gen --rows 30000 --cols 2 --out " + (dir / "big.csv"), log) == 0);
  CHECK(cli("--time-limit-s 1e-6 run --method direct --query " + (dir / "ok.paql") +
                " --input " + (dir / "big.csv"),
            log) == 3);
  CHECK(nlohmann::json::parse(slurp(log)).at("status") == "TimeLimit");
}

TEST_CASE("usage and runtime errors") {
  TempDir dir("err");
  const std::string log = dir / "log";
  const std::string csv = dir / "d.csv";
  REQUIRE(cli("gen --rows 20 --cols 2 --out " + csv, log) == 0);
  CHECK(cli("partition --input " + csv + " --tau 0 --out " + (dir / "p.json"), log) ==
        64);
  write(dir / "q.paql", "SELECT PACKAGE(R) AS P FROM synthetic R");
  CHECK(cli("run --method sketchrefine --query " + (dir / "q.paql") + " --input " +
                csv,
            log) == 64);
  CHECK(cli("", log) == 64);
  CHECK(cli("frobnicate", log) == 64);
  CHECK(cli("run --method direct --query " + (dir / "missing.paql") + " --input " +
                csv,
            log) == 1);
  write(dir / "bad.paql", "SELECT PACKAGE(R) AS P FROM synthetic R SUCH THAT");
  CHECK(cli("run --method direct --query " + (dir / "bad.paql") + " --input " + csv,
            log) == 1);
}

TEST_CASE("bench writes json and csv") {
  TempDir dir("bench");
  const std::string log = dir / "log";
  const std::string csv = dir / "d.csv";
  REQUIRE(cli("--seed 5 gen --rows 300 --cols 3 --out " + csv + " --queries 2 " +
                  "--workload-dir " + (dir / "w"),
              log) == 0);
  REQUIRE(cli("bench --input " + csv + " --queries " + (dir / "w/q1.paql") + " " +
                  (dir / "w/q2.paql") + " --tau 30 --repetitions 1 --out-json " +
                  (dir / "b.json") + " --out-csv " + (dir / "b.csv"),
              log) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "b.json"));
  CHECK(doc.at("rows").size() == 4);
  CHECK(slurp(dir / "b.csv").rfind("query,method,scale", 0) == 0);
}

}  // TEST_SUITE
