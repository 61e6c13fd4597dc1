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

// Abstract syntax of PaQL package queries.
//
//   SELECT PACKAGE(R) AS P
//   FROM Recipes R REPEAT 0
//   WHERE R.gluten = 'free'
//   SUCH THAT COUNT(P.*) = 3 AND SUM(P.kcal) BETWEEN 2.0 AND 2.5
//   MINIMIZE SUM(P.saturated_fat)
//
// Global predicates are a conjunction. Each one compares a linear aggregate
// (optionally shifted by a constant) with a constant, a constant range, or, for
// counts, with another count.

#ifndef PAQL_QUERY_HPP_
#define PAQL_QUERY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paql/relation.hpp"

namespace paql {

enum class AggregateKind { kCountStar, kSum, kAvg, kFilteredCount };

struct AggregateExpr {
  AggregateKind kind = AggregateKind::kCountStar;
  // Package (or relation) alias as written; empty after validation.
  std::string qualifier;
  // Attribute for SUM and AVG.
  std::string attribute;
  // Selection applied to package tuples for kFilteredCount.
  BasePredicate filter;

  bool operator==(const AggregateExpr&) const = default;

  static AggregateExpr count_star() { return {}; }
  static AggregateExpr sum(std::string attribute) {
    return {AggregateKind::kSum, {}, std::move(attribute), {}};
  }
  static AggregateExpr avg(std::string attribute) {
    return {AggregateKind::kAvg, {}, std::move(attribute), {}};
  }
  static AggregateExpr filtered_count(BasePredicate filter) {
    return {AggregateKind::kFilteredCount, {}, {}, std::move(filter)};
  }
};

enum class GlobalOp { kLe, kGe, kEq, kBetween };

std::string_view to_string(GlobalOp op);

// lhs + offset  op  rhs
//
// rhs is `bound` (or [bound, upper] for kBetween) unless `rhs_count` is set,
// in which case it is that count aggregate plus `bound`.
//
// `offset` is a constant added to the linearized left-hand side. Parsed
// queries use it for "COUNT(P.*) + 2 = 3"-style forms; refine subproblems use
// it to account for tuples fixed outside the subproblem.
struct GlobalPredicate {
  AggregateExpr lhs;
  GlobalOp op = GlobalOp::kLe;
  double bound = 0.0;
  double upper = 0.0;
  std::optional<AggregateExpr> rhs_count;
  double offset = 0.0;

  bool operator==(const GlobalPredicate&) const = default;
};

enum class Direction { kMinimize, kMaximize };

struct Objective {
  Direction direction = Direction::kMaximize;
  AggregateExpr expr;

  bool operator==(const Objective&) const = default;
};

struct PackageQuery {
  // Aliases listed inside PACKAGE(...). Validation requires exactly one.
  std::vector<std::string> package_sources;
  std::string package_name;
  std::string relation_name;
  std::string relation_alias;
  // Absent means unlimited repetition.
  std::optional<std::int64_t> repeat;
  std::optional<BasePredicate> base_predicate;
  std::vector<GlobalPredicate> global_predicates;
  std::optional<Objective> objective;
  // Set by validate(); translation refuses unvalidated queries.
  bool validated = false;

  bool operator==(const PackageQuery&) const = default;

  // Upper bound on any tuple's multiplicity implied by REPEAT, if present.
  std::optional<std::int64_t> max_multiplicity() const {
    if (!repeat) return std::nullopt;
    return *repeat + 1;
  }
};

// Parses PaQL text. Throws ParseError with position information for syntax
// errors and for unsupported constructs (joins, strict global inequalities,
// MIN/MAX, non-linear arithmetic).
PackageQuery parse(std::string_view text);

// Reads and parses a `.paql` file.
PackageQuery parse_file(const std::string& path);

// Canonical PaQL text; parse(to_paql(q)) == q for parsed queries.
std::string to_paql(const PackageQuery& query);

// Resolves attribute references against the schema, strips alias qualifiers,
// and lowers BETWEEN into a >= / <= pair. Throws ValidationError.
PackageQuery validate(const PackageQuery& query, const Schema& schema);

// Numeric attributes referenced by global predicates and the objective
// (including attributes inside filtered counts), in first-use order.
std::vector<std::string> query_attributes(const PackageQuery& query);

}  // namespace paql

#endif  // PAQL_QUERY_HPP_
