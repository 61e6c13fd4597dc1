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

// Package query evaluation.
//
// Direct translates the whole query into one ILP. SketchRefine first solves
// the query over one representative (centroid) tuple per partitioning group,
// then replaces the representatives group by group with real tuples,
// backtracking greedily when a group cannot be refined.

#ifndef PAQL_EVALUATOR_HPP_
#define PAQL_EVALUATOR_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paql/ilp.hpp"
#include "paql/partitioner.hpp"
#include "paql/query.hpp"
#include "paql/relation.hpp"
#include "paql/solver.hpp"

namespace paql {

struct Package {
  // tuple id -> multiplicity (>= 1)
  std::map<TupleId, std::int64_t> entries;
  // Objective recomputed by aggregating over the package; 0 without one.
  double objective_value = 0.0;

  std::int64_t cardinality() const;
  bool operator==(const Package&) const = default;
};

enum class Method { kDirect, kSketchRefine };
enum class EvalStatus { kFeasible, kInfeasible, kTimeLimit };

std::string_view to_string(Method method);
std::string_view to_string(EvalStatus status);

struct EvalTimings {
  double translate_ms = 0.0;
  double solve_ms = 0.0;
  double sketch_ms = 0.0;
  double refine_ms = 0.0;
  double total_ms = 0.0;
};

// Flags attached to reports.
inline constexpr const char* kFlagBacktrackLimit = "backtrack-limit";
inline constexpr const char* kFlagHybridSketch = "hybrid-sketch";
inline constexpr const char* kFlagPartialCoverage = "partial-coverage";
inline constexpr const char* kFlagDegenerateGroups = "degenerate-groups";
inline constexpr const char* kFlagObjectiveMismatch = "objective-mismatch";
inline constexpr const char* kFlagVerificationFailed = "verification-failed";

struct EvalReport {
  Method method = Method::kDirect;
  EvalStatus status = EvalStatus::kInfeasible;
  // Present when status is kFeasible; may hold the incumbent on kTimeLimit.
  std::optional<Package> package;
  EvalTimings timings;
  std::size_t backtracks = 0;
  // ILP solves issued, over all levels.
  std::size_t subproblems = 0;
  // Refine queries issued at the top level.
  std::size_t refine_solves = 0;
  std::size_t sketch_groups = 0;
  std::vector<std::string> flags;

  bool has_flag(std::string_view flag) const;
};

struct EvalConfig {
  // time_limit_s is the budget for the whole evaluation.
  SolverConfig solver;
  // Seeds refinement and hybrid-sketch orders.
  std::uint64_t seed = 0;
  // Cap on refine solves; defaults to 10 * number of groups.
  std::optional<std::size_t> backtrack_limit;
  bool hybrid_sketch = true;
  // Subproblems with more candidates than this are themselves solved with
  // SketchRefine. Defaults to the partitioning's tau.
  std::optional<std::size_t> recursion_threshold;
  std::size_t max_recursion_depth = 3;
  // Defaults to branch-and-bound.
  const Solver* solver_impl = nullptr;
};

// Validates `query` if needed, then translate -> derive_bounds -> solve.
// Throws UnboundedError when no finite multiplicity bound can be derived.
EvalReport eval_direct(const PackageQuery& query, const Relation& relation,
                       const EvalConfig& config = {});

EvalReport eval_sketchrefine(const PackageQuery& query,
                             const Relation& relation,
                             const Partitioning& partitioning,
                             const EvalConfig& config = {});

// The sketch query: `query` over the representative relation (row j is the
// representative of group j; numeric attributes are member means, categorical
// ones the most frequent label), with per-representative multiplicity caps
// |G_j| * (1 + K), or none without REPEAT.
struct SketchQuery {
  Relation representatives;
  PackageQuery query;
  std::vector<std::optional<std::int64_t>> capacities;
};

SketchQuery build_sketch_query(const PackageQuery& query,
                               const Relation& relation,
                               const Partitioning& partitioning);

// Sketch fallback used when the plain sketch query is infeasible: for groups
// in seeded-random order, solve the query over the real tuples of that group
// plus the representatives of all other groups. The first feasible solve
// wins; nullopt when every group fails.
struct HybridSketch {
  std::size_t group = 0;
  // Real tuples chosen from `group` (ids into the input relation).
  std::map<TupleId, std::int64_t> tuples;
  // Per group; zero for `group` itself.
  std::vector<std::int64_t> representative_multiplicities;
};

std::optional<HybridSketch> hybrid_sketch(const PackageQuery& query,
                                          const Relation& relation,
                                          const Partitioning& partitioning,
                                          const EvalConfig& config = {});

// Linear left-hand-side contribution of `partial` (tuple id, multiplicity)
// pairs to each global predicate of a validated query.
std::vector<double> predicate_contributions(
    const PackageQuery& query, const Relation& relation,
    std::span<const std::pair<TupleId, std::int64_t>> partial);

// Refine query: bounds of COUNT/SUM predicates shifted by the partial
// package's contribution; AVG predicates carry it as an offset in their
// linearized form. `contributions` is aligned with the global predicates.
PackageQuery build_refine_query(const PackageQuery& query,
                                std::span<const double> contributions);

// Direct aggregation of one aggregate over a package.
double aggregate(const AggregateExpr& expr, const Relation& relation,
                 const Package& package);

// True iff the package satisfies the query: every tuple passes the base
// predicate, multiplicities respect REPEAT and every global predicate holds.
bool package_satisfies(const PackageQuery& query, const Relation& relation,
                       const Package& package);

// Obj_D / Obj_S when maximizing, Obj_S / Obj_D when minimizing. Throws
// ValidationError unless both reports are feasible and std::domain_error on
// a zero denominator.
double approximation_ratio(const EvalReport& direct,
                           const EvalReport& sketch_refine,
                           Direction direction);

std::string to_json(const EvalReport& report);

}  // namespace paql

#endif  // PAQL_EVALUATOR_HPP_
