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

#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "paql/error.hpp"
#include "paql/query.hpp"

using namespace paql;

namespace {

const char* kMeals = R"(
  SELECT PACKAGE(R) AS P
  FROM Recipes R REPEAT 0
  WHERE R.gluten = 'free'
  SUCH THAT COUNT(P.*) = 3 AND SUM(P.kcal) BETWEEN 2.0 AND 2.5
  MINIMIZE SUM(P.saturated_fat);
)";

Schema recipes() {
  return Schema("Recipes", {{"gluten", AttributeKind::kCategorical},
                            {"kcal", AttributeKind::kNumeric},
                            {"saturated_fat", AttributeKind::kNumeric}});
}

// Line and column of the ParseError raised for `text`.
std::pair<std::size_t, std::size_t> error_at(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  FAIL("no ParseError for: " << text);
  return {0, 0};
}

}  // namespace

TEST_SUITE("paql") {

TEST_CASE("meal planner query parses into the expected tree") {
  const PackageQuery q = parse(kMeals);
  CHECK(q.package_sources == std::vector<std::string>{"R"});
  CHECK(q.package_name == "P");
  CHECK(q.relation_name == "Recipes");
  CHECK(q.relation_alias == "R");
  CHECK(q.repeat == 0);
  CHECK(q.max_multiplicity() == 1);
  REQUIRE(q.base_predicate);
  REQUIRE(q.base_predicate->conjuncts.size() == 1);
  CHECK(q.base_predicate->conjuncts[0].attribute == "gluten");
  CHECK(std::get<std::string>(q.base_predicate->conjuncts[0].value) == "free");
  REQUIRE(q.global_predicates.size() == 2);
  CHECK(q.global_predicates[0].lhs.kind == AggregateKind::kCountStar);
  CHECK(q.global_predicates[0].op == GlobalOp::kEq);
  CHECK(q.global_predicates[0].bound == 3.0);
  CHECK(q.global_predicates[1].op == GlobalOp::kBetween);
  CHECK(q.global_predicates[1].bound == 2.0);
  CHECK(q.global_predicates[1].upper == 2.5);
  REQUIRE(q.objective);
  CHECK(q.objective->direction == Direction::kMinimize);
  CHECK(q.objective->expr.attribute == "saturated_fat");
  CHECK_FALSE(q.validated);
}

TEST_CASE("keywords are case-insensitive and REPEAT is optional") {
  const PackageQuery q = parse(
      "select package(R) as P from T R such that count(P.*) <= 4 "
      "maximize sum(P.v)");
  CHECK_FALSE(q.repeat);
  CHECK_FALSE(q.max_multiplicity());
  CHECK(q.objective->direction == Direction::kMaximize);
}

TEST_CASE("constants on the left are mirrored, offsets are kept") {
  const PackageQuery q = parse(
      "SELECT PACKAGE(R) AS P FROM T R SUCH THAT 5 >= COUNT(P.*) AND "
      "COUNT(P.*) + 2 = 3 AND (SELECT COUNT(*) FROM P WHERE P.c = 'x') >= "
      "(SELECT COUNT(*) FROM P WHERE P.c = 'y') + 1");
  REQUIRE(q.global_predicates.size() == 3);
  CHECK(q.global_predicates[0].op == GlobalOp::kLe);
  CHECK(q.global_predicates[0].bound == 5.0);
  CHECK(q.global_predicates[1].offset == 2.0);
  CHECK(q.global_predicates[2].lhs.kind == AggregateKind::kFilteredCount);
  REQUIRE(q.global_predicates[2].rhs_count);
  CHECK(q.global_predicates[2].bound == 1.0);
}

TEST_CASE("to_paql round-trips random queries") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const std::string text = oracle::random_query_text(rng, i % 3);
    const PackageQuery q = parse(text);
    CAPTURE(text);
    CHECK(parse(to_paql(q)) == q);
  }
  const PackageQuery meals = parse(kMeals);
  CHECK(parse(to_paql(meals)) == meals);
}

TEST_CASE("unsupported constructs are parse errors with positions") {
  CHECK(error_at("SELECT PACKAGE(R) AS P FROM T R SUCH THAT COUNT(P.*) < 3") ==
        std::pair<std::size_t, std::size_t>{1, 54});
  CHECK(error_at("SELECT PACKAGE(R) AS P FROM T R\nSUCH THAT MAX(P.v) <= 3")
            .first == 2);
  CHECK_THROWS_AS(parse("SELECT PACKAGE(R) AS P FROM T R, S Q"), ParseError);
  CHECK_THROWS_AS(
      parse("SELECT PACKAGE(R) AS P FROM T R WHERE R.a = 1 OR R.a = 2"),
      ParseError);
  CHECK_THROWS_AS(
      parse("SELECT PACKAGE(R) AS P FROM T R SUCH THAT SUM(P.a) * 2 <= 3"),
      ParseError);
  CHECK_THROWS_AS(
      parse("SELECT PACKAGE(R) AS P FROM T R SUCH THAT SUM(P.a) <= SUM(P.b)"),
      ParseError);
  CHECK_THROWS_AS(parse("SELECT PACKAGE(R) AS P FROM T R SUCH THAT 1 <= 2"),
                  ParseError);
  CHECK_THROWS_AS(
      parse("SELECT PACKAGE(R) AS P FROM T R SUCH THAT SUM(P.a) BETWEEN 3 AND 1"),
      ParseError);
  CHECK_THROWS_AS(parse("SELECT PACKAGE(R) AS P FROM T R MAXIMIZE AVG(P.a)"),
                  ParseError);
  CHECK_THROWS_AS(parse("SELECT PACKAGE(R) AS P FROM T R extra"), ParseError);
  CHECK_THROWS_AS(parse("SELECT PACKAGE(R) AS P FROM T R SUCH THAT COUNT(P.*) <= 'a'"),
                  ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("validate resolves, strips qualifiers and lowers BETWEEN") {
  const PackageQuery q = validate(parse(kMeals), recipes());
  CHECK(q.validated);
  REQUIRE(q.global_predicates.size() == 3);
  CHECK(q.global_predicates[1].op == GlobalOp::kGe);
  CHECK(q.global_predicates[1].bound == 2.0);
  CHECK(q.global_predicates[2].op == GlobalOp::kLe);
  CHECK(q.global_predicates[2].bound == 2.5);
  CHECK(q.objective->expr.qualifier.empty());
  CHECK(query_attributes(q) == std::vector<std::string>{"kcal", "saturated_fat"});
}

TEST_CASE("AVG offsets move into the bound") {
  const PackageQuery q = validate(
      parse("SELECT PACKAGE(R) AS P FROM Recipes R SUCH THAT AVG(P.kcal) + 1 <= 3"),
      recipes());
  CHECK(q.global_predicates[0].bound == 2.0);
  CHECK(q.global_predicates[0].offset == 0.0);
}

TEST_CASE("validation errors") {
  const Schema s = recipes();
  auto invalid = [&](const char* text) {
    CAPTURE(text);
    CHECK_THROWS_AS(validate(parse(text), s), ValidationError);
  };
  invalid("SELECT PACKAGE(R) AS P FROM Recipes R SUCH THAT SUM(P.nope) <= 1");
  invalid("SELECT PACKAGE(R) AS P FROM Recipes R SUCH THAT SUM(P.gluten) <= 1");
  invalid("SELECT PACKAGE(X) AS P FROM Recipes R SUCH THAT COUNT(P.*) <= 1");
  invalid("SELECT PACKAGE(R) AS P FROM Recipes R SUCH THAT COUNT(Q.*) <= 1");
  invalid("SELECT PACKAGE(R) AS P FROM Recipes R WHERE R.kcal = 'x'");
  invalid("SELECT PACKAGE(R) AS P FROM Recipes R WHERE S.kcal = 1");
  invalid("SELECT PACKAGE(R, R) AS P FROM Recipes R");
}

TEST_CASE("parse_file reads a .paql file") {
  const std::string path = "paql_parse_file_test.paql";
  {
    std::ofstream out(path);
    out << kMeals;
  }
  CHECK(parse_file(path) == parse(kMeals));
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_file("/nonexistent/q.paql"), IoError);
}

}  // TEST_SUITE
