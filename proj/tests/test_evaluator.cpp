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

#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"
#include "paql/error.hpp"
#include "paql/evaluator.hpp"
#include "paql/generator.hpp"

using namespace paql;

namespace {

Relation one_column(const std::vector<double>& v) {
  std::vector<Column> cols(1);
  cols[0].numbers = v;
  return Relation(Schema("T", {{"v", AttributeKind::kNumeric}}), cols);
}

PackageQuery q_of(const std::string& text, const Relation& r) {
  return validate(parse(text), r.schema());
}

// Tuples 0..3 = {0, 0, 0, 10} in group 1 (centroid 2.5), tuples 4..7 = 5 in
// group 2. Only the outlier 10 reaches SUM >= 8 alone.
const char* kOutlierPartitioning = R"({
  "attrs": ["v"], "tau": 4, "omega": "inf",
  "gids": [1, 1, 1, 1, 2, 2, 2, 2],
  "representatives": [[2.5], [5.0]], "radii": [7.5, 0.0], "sizes": [4, 4],
  "degenerate": []
})";
const char* kOutlierQuery =
    "SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT COUNT(P.*) = 1 AND "
    "SUM(P.v) >= 8 MAXIMIZE SUM(P.v)";

Relation outlier_relation() { return one_column({0, 0, 0, 10, 5, 5, 5, 5}); }

}  // namespace

TEST_SUITE("evaluator") {

TEST_CASE("direct solves a hand-checked query") {
  // Best pair under SUM <= 10 from {2, 3, 5, 7, 8}: 3 + 7 or 2 + 8 = 10.
  const Relation r = one_column({2, 3, 5, 7, 8});
  const EvalReport rep = eval_direct(
      q_of("SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT COUNT(P.*) = 2 AND "
           "SUM(P.v) <= 10 MAXIMIZE SUM(P.v)",
           r),
      r);
  REQUIRE(rep.status == EvalStatus::kFeasible);
  CHECK(rep.package->objective_value == 10.0);
  CHECK(rep.package->cardinality() == 2);
  CHECK(rep.subproblems == 1);
  CHECK(rep.flags.empty());
  CHECK(rep.timings.total_ms >= rep.timings.solve_ms);

  const EvalReport none = eval_direct(
      q_of("SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT SUM(P.v) >= 26", r), r);
  CHECK(none.status == EvalStatus::kInfeasible);
  CHECK_FALSE(none.package);

  CHECK_THROWS_AS(eval_direct(q_of("SELECT PACKAGE(T) AS P FROM T SUCH THAT "
                                   "COUNT(P.*) >= 1 MAXIMIZE SUM(P.v)",
                                   r),
                              r),
                  UnboundedError);
}

TEST_CASE("direct agrees with exhaustive search") {
  std::mt19937_64 rng(31);
  int feasible = 0;
  for (int t = 0; t < 150; ++t) {
    const Relation r = oracle::random_relation(2 + t % 7, rng);
    const PackageQuery q =
        validate(parse(oracle::random_query_text(rng, t % 3)), r.schema());
    const oracle::Best want = oracle::enumerate(q, r);
    const EvalReport got = eval_direct(q, r);
    CAPTURE(to_paql(q));
    REQUIRE((got.status == EvalStatus::kFeasible) == want.feasible);
    if (!want.feasible) continue;
    ++feasible;
    CHECK(got.package->objective_value ==
          doctest::Approx(want.objective).epsilon(1e-9));
    CHECK(oracle::satisfies(q, r, oracle::dense(*got.package, r.size())));
  }
  CHECK(feasible > 40);
}

TEST_CASE("hybrid sketch rescues an outlier") {
  const Relation r = outlier_relation();
  const PackageQuery q = q_of(kOutlierQuery, r);
  const Partitioning p = parse_partitioning(kOutlierPartitioning);
  // Exhaustive search confirms the only answer.
  const oracle::Best best = oracle::enumerate(q, r);
  REQUIRE(best.feasible);
  CHECK(best.objective == 10.0);

  const SketchQuery sketch = build_sketch_query(q, r, p);
  CHECK(eval_direct(sketch.query, sketch.representatives).status ==
        EvalStatus::kInfeasible);

  const EvalReport rep = eval_sketchrefine(q, r, p);
  REQUIRE(rep.status == EvalStatus::kFeasible);
  CHECK(rep.has_flag(kFlagHybridSketch));
  CHECK(rep.package->entries == std::map<TupleId, std::int64_t>{{3, 1}});

  const auto h = hybrid_sketch(q, r, p);
  REQUIRE(h);
  CHECK(h->group == 0);
  CHECK(h->tuples == std::map<TupleId, std::int64_t>{{3, 1}});
  CHECK(h->representative_multiplicities == std::vector<std::int64_t>{0, 0});

  EvalConfig off;
  off.hybrid_sketch = false;
  const EvalReport plain = eval_sketchrefine(q, r, p, off);
  CHECK(plain.status == EvalStatus::kInfeasible);
  CHECK_FALSE(plain.has_flag(kFlagHybridSketch));
}

TEST_CASE("plain feasible sketch never uses the hybrid") {
  const Relation r = outlier_relation();
  const Partitioning p = parse_partitioning(kOutlierPartitioning);
  const EvalReport rep = eval_sketchrefine(
      q_of("SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT COUNT(P.*) = 2 "
           "MAXIMIZE SUM(P.v)",
           r),
      r, p);
  REQUIRE(rep.status == EvalStatus::kFeasible);
  CHECK_FALSE(rep.has_flag(kFlagHybridSketch));
  // Both picks go to the heavier representative; its group refines to 5 + 5.
  CHECK(rep.package->objective_value == 10.0);
}

TEST_CASE("genuinely infeasible queries stay infeasible") {
  const Relation r = outlier_relation();
  const Partitioning p = parse_partitioning(kOutlierPartitioning);
  const PackageQuery q = q_of(
      "SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT SUM(P.v) >= 31", r);
  CHECK_FALSE(oracle::enumerate(q, r).feasible);
  CHECK(eval_sketchrefine(q, r, p).status == EvalStatus::kInfeasible);
  CHECK_FALSE(hybrid_sketch(q, r, p));
}

TEST_CASE("sketch query uses member means and REPEAT caps") {
  std::vector<Column> cols(2);
  cols[0].numbers = {1, 3, 10, 20, 30};
  cols[1].labels = {"a", "b", "b", "c", "c"};
  const Relation r(Schema("T", {{"v", AttributeKind::kNumeric},
                                {"c", AttributeKind::kCategorical}}),
                   cols);
  Partitioning p = partition(r, {{"v"}, 2, kNoRadiusLimit});
  const PackageQuery q = q_of(
      "SELECT PACKAGE(T) AS P FROM T REPEAT 2 SUCH THAT COUNT(P.*) <= 3", r);
  const SketchQuery s = build_sketch_query(q, r, p);
  REQUIRE(s.representatives.size() == p.num_groups());
  for (std::size_t g = 0; g < p.num_groups(); ++g) {
    double sum = 0.0;
    for (TupleId id : p.members[g]) sum += r.numeric(0, id);
    CHECK(s.representatives.numeric(0, g) ==
          doctest::Approx(sum / p.members[g].size()));
    REQUIRE(s.capacities[g]);
    CHECK(*s.capacities[g] == 3 * static_cast<std::int64_t>(p.size(g)));
  }
  // {1, 3} share a group: labels a and b tie, the smaller label wins.
  const std::size_t g0 = p.gid[0];
  REQUIRE(p.members[g0] == std::vector<TupleId>{0, 1});
  CHECK(s.representatives.categorical(1, g0) == "a");

  const SketchQuery unlimited = build_sketch_query(
      q_of("SELECT PACKAGE(T) AS P FROM T SUCH THAT COUNT(P.*) <= 3", r), r, p);
  for (const auto& c : unlimited.capacities) CHECK_FALSE(c);
}

TEST_CASE("refine queries shift bounds by the fixed part") {
  const Relation r = one_column({2, 4, 6});
  const PackageQuery q = q_of(
      "SELECT PACKAGE(T) AS P FROM T SUCH THAT COUNT(P.*) BETWEEN 2 AND 4 AND "
      "SUM(P.v) <= 20 AND AVG(P.v) >= 3",
      r);
  const std::vector<std::pair<TupleId, std::int64_t>> partial = {{0, 1}, {2, 2}};
  const std::vector<double> c = predicate_contributions(q, r, partial);
  // COUNT: 3 (twice, BETWEEN is lowered), SUM: 2 + 12, AVG row: (2-3) + 2*(6-3).
  CHECK(c == std::vector<double>{3, 3, 14, 5});
  const PackageQuery refine = build_refine_query(q, c);
  CHECK(refine.global_predicates[0].bound == -1);
  CHECK(refine.global_predicates[1].bound == 1);
  CHECK(refine.global_predicates[2].bound == 6);
  CHECK(refine.global_predicates[3].bound == 3);
  CHECK(refine.global_predicates[3].offset == 5);
  CHECK_THROWS_AS(build_refine_query(q, std::vector<double>{1}),
                  std::invalid_argument);
  // Adding tuple 1 to the partial package satisfies the original iff the
  // refine query accepts {1}.
  oracle::Counts rest = {0, 1, 0};
  CHECK(oracle::satisfies(refine, r, rest) ==
        oracle::satisfies(q, r, oracle::Counts{1, 1, 2}));
}

TEST_CASE("sketchrefine packages are always valid") {
  std::mt19937_64 rng(99);
  int feasible = 0;
  for (int t = 0; t < 120; ++t) {
    const Relation r = oracle::random_relation(20 + t % 60, rng, 0, 12);
    const PackageQuery q =
        validate(parse(oracle::random_query_text(rng, t % 3)), r.schema());
    const Partitioning p =
        partition(r, {{"a", "b"}, static_cast<std::size_t>(3 + t % 10), kNoRadiusLimit});
    EvalConfig config;
    config.seed = t;
    const EvalReport sr = eval_sketchrefine(q, r, p, config);
    const EvalReport d = eval_direct(q, r);
    CAPTURE(to_paql(q));
    if (sr.status != EvalStatus::kFeasible) continue;
    ++feasible;
    CHECK(oracle::satisfies(q, r, oracle::dense(*sr.package, r.size())));
    // Direct is exact, so it is feasible and at least as good.
    REQUIRE(d.status == EvalStatus::kFeasible);
    if (q.objective) {
      const double sign =
          q.objective->direction == Direction::kMaximize ? 1.0 : -1.0;
      CHECK(sign * d.package->objective_value >=
            sign * sr.package->objective_value - 1e-9);
    }
  }
  CHECK(feasible > 50);
}

TEST_CASE("recursion keeps packages valid and is deterministic") {
  DataParams d;
  d.rows = 3000;
  d.cols = 2;
  d.seed = 4;
  const Relation r = generate_relation(d);
  const PackageQuery q = q_of(
      "SELECT PACKAGE(R) AS P FROM synthetic R REPEAT 0 SUCH THAT "
      "COUNT(P.*) BETWEEN 5 AND 10 AND SUM(P.attr_1) <= 3 MAXIMIZE SUM(P.attr_2)",
      r);
  const Partitioning p = partition(r, {{"attr_1", "attr_2"}, 1000, kNoRadiusLimit});
  EvalConfig config;
  config.recursion_threshold = 50;
  config.seed = 5;
  const EvalReport a = eval_sketchrefine(q, r, p, config);
  REQUIRE(a.status == EvalStatus::kFeasible);
  CHECK(oracle::satisfies(q, r, oracle::dense(*a.package, r.size())));
  EvalConfig flat;
  flat.seed = 5;
  const EvalReport f = eval_sketchrefine(q, r, p, flat);
  REQUIRE(f.status == EvalStatus::kFeasible);
  CHECK(a.subproblems > f.subproblems);
  const EvalReport b = eval_sketchrefine(q, r, p, config);
  CHECK(b.package == a.package);
}

TEST_CASE("report flags") {
  const Relation r = outlier_relation();
  const Partitioning p = parse_partitioning(kOutlierPartitioning);
  EvalConfig zero;
  zero.backtrack_limit = 0;
  const EvalReport limited = eval_sketchrefine(
      q_of("SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT COUNT(P.*) = 2", r),
      r, p, zero);
  CHECK(limited.status == EvalStatus::kInfeasible);
  CHECK(limited.has_flag(kFlagBacktrackLimit));

  std::vector<Column> cols(2);
  cols[0].numbers = {1, 1, 1, 2};
  cols[1].numbers = {4, 5, 6, 7};
  const Relation two(Schema("T", {{"a", AttributeKind::kNumeric},
                                  {"b", AttributeKind::kNumeric}}),
                     cols);
  const Partitioning on_a = partition(two, {{"a"}, 1, kNoRadiusLimit});
  const EvalReport flagged = eval_sketchrefine(
      q_of("SELECT PACKAGE(T) AS P FROM T REPEAT 0 SUCH THAT COUNT(P.*) = 1 "
           "MAXIMIZE SUM(P.b)",
           two),
      two, on_a);
  CHECK(flagged.has_flag(kFlagPartialCoverage));
  CHECK(flagged.has_flag(kFlagDegenerateGroups));
  CHECK(flagged.status == EvalStatus::kFeasible);

  const Partitioning small = partition(one_column({1, 2}), {{"v"}, 1, kNoRadiusLimit});
  CHECK_THROWS_AS(eval_sketchrefine(q_of(kOutlierQuery, r), r, small),
                  ValidationError);
}

TEST_CASE("aggregates, satisfaction and ratios") {
  const Relation r = one_column({2, 4, 6});
  Package p;
  CHECK(std::isnan(aggregate(AggregateExpr::avg("v"), r, p)));
  p.entries = {{0, 2}, {2, 1}};
  CHECK(aggregate(AggregateExpr::sum("v"), r, p) == 10.0);
  CHECK(aggregate(AggregateExpr::count_star(), r, p) == 3.0);
  CHECK(aggregate(AggregateExpr::avg("v"), r, p) == doctest::Approx(10.0 / 3));
  CHECK(p.cardinality() == 3);

  const PackageQuery q = q_of(
      "SELECT PACKAGE(T) AS P FROM T REPEAT 1 WHERE T.v > 1 SUCH THAT "
      "SUM(P.v) <= 10",
      r);
  CHECK(package_satisfies(q, r, p));
  Package big = p;
  big.entries[1] = 1;
  CHECK_FALSE(package_satisfies(q, r, big));
  Package bad_id;
  bad_id.entries = {{7, 1}};
  CHECK_FALSE(package_satisfies(q, r, bad_id));
  Package too_many;
  too_many.entries = {{0, 3}};
  CHECK_FALSE(package_satisfies(q, r, too_many));

  EvalReport d, s;
  d.status = s.status = EvalStatus::kFeasible;
  d.package = Package{{}, 10.0};
  s.package = Package{{}, 8.0};
  CHECK(approximation_ratio(d, s, Direction::kMaximize) == 1.25);
  CHECK(approximation_ratio(s, d, Direction::kMinimize) == 1.25);
  d.package->objective_value = s.package->objective_value = 0.0;
  CHECK(approximation_ratio(d, s, Direction::kMaximize) == 1.0);
  d.package->objective_value = 1.0;
  CHECK_THROWS_AS(approximation_ratio(d, s, Direction::kMaximize),
                  std::domain_error);
  s.status = EvalStatus::kInfeasible;
  CHECK_THROWS_AS(approximation_ratio(d, s, Direction::kMaximize),
                  ValidationError);
}

TEST_CASE("report json layout") {
  const Relation r = one_column({2, 3, 5});
  const EvalReport rep = eval_direct(
      q_of("SELECT PACKAGE(T) AS P FROM T REPEAT 1 SUCH THAT COUNT(P.*) <= 2 "
           "MAXIMIZE SUM(P.v)",
           r),
      r);
  const auto doc = nlohmann::ordered_json::parse(to_json(rep));
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"method", "status", "objective",
                                         "package", "timings_ms", "backtracks",
                                         "subproblems", "flags"});
  CHECK(doc["method"] == "direct");
  CHECK(doc["status"] == "Feasible");
  CHECK(doc["objective"] == 10.0);
  CHECK(doc["package"] == nlohmann::ordered_json::parse("[[2, 2]]"));
  for (const char* t : {"translate", "solve", "sketch", "refine", "total"}) {
    CHECK(doc["timings_ms"].contains(t));
  }
  EvalReport empty;
  empty.method = Method::kSketchRefine;
  const auto e = nlohmann::json::parse(to_json(empty));
  CHECK(e["objective"].is_null());
  CHECK(e["package"].empty());
  CHECK(e["status"] == "Infeasible");
}

}  // TEST_SUITE
