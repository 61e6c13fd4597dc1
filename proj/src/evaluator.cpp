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

#include "paql/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "paql/error.hpp"

namespace paql {

std::int64_t Package::cardinality() const {
  std::int64_t total = 0;
  for (const auto& [id, mult] : entries) total += mult;
  return total;
}

std::string_view to_string(Method method) {
  return method == Method::kDirect ? "direct" : "sketchrefine";
}

std::string_view to_string(EvalStatus status) {
  switch (status) {
    case EvalStatus::kFeasible: return "Feasible";
    case EvalStatus::kInfeasible: return "Infeasible";
    case EvalStatus::kTimeLimit: return "TimeLimit";
  }
  return "?";
}

bool EvalReport::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

double aggregate(const AggregateExpr& expr, const Relation& relation,
                 const Package& package) {
  long double total = 0.0L;
  std::int64_t count = 0;
  std::size_t attribute = 0;
  if (expr.kind == AggregateKind::kSum || expr.kind == AggregateKind::kAvg) {
    attribute = relation.schema().require(expr.attribute);
  }
  for (const auto& [id, mult] : package.entries) {
    switch (expr.kind) {
      case AggregateKind::kCountStar:
        total += mult;
        break;
      case AggregateKind::kSum:
      case AggregateKind::kAvg:
        total += static_cast<long double>(relation.numeric(attribute, id)) * mult;
        count += mult;
        break;
      case AggregateKind::kFilteredCount:
        if (satisfies(relation, id, expr.filter)) total += mult;
        break;
    }
  }
  if (expr.kind == AggregateKind::kAvg) {
    if (count == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(total / count);
  }
  return static_cast<double>(total);
}

bool package_satisfies(const PackageQuery& query, const Relation& relation,
                       const Package& package) {
  const PackageQuery q =
      query.validated ? query : validate(query, relation.schema());
  std::vector<TupleId> ids;
  std::vector<std::int64_t> x;
  for (const auto& [id, mult] : package.entries) {
    if (id >= relation.size() || mult < 1) return false;
    if (q.base_predicate && !satisfies(relation, id, *q.base_predicate)) {
      return false;
    }
    ids.push_back(id);
    x.push_back(mult);
  }
  const IlpModel model = translate(q, relation, ids);
  return feasible(model, x);
}

std::vector<double> predicate_contributions(
    const PackageQuery& query, const Relation& relation,
    std::span<const std::pair<TupleId, std::int64_t>> partial) {
  std::vector<double> out;
  for (const GlobalPredicate& g : query.global_predicates) {
    const LinearForm form = LinearForm::of_predicate(g, relation.schema());
    long double total = 0.0L;
    for (const auto& [id, mult] : partial) {
      total += static_cast<long double>(form.coefficient(relation, id)) * mult;
    }
    out.push_back(static_cast<double>(total));
  }
  return out;
}

PackageQuery build_refine_query(const PackageQuery& query,
                                std::span<const double> contributions) {
  if (contributions.size() != query.global_predicates.size()) {
    throw std::invalid_argument("one contribution per global predicate needed");
  }
  PackageQuery out = query;
  for (std::size_t p = 0; p < out.global_predicates.size(); ++p) {
    GlobalPredicate& g = out.global_predicates[p];
    if (g.lhs.kind == AggregateKind::kAvg) {
      g.offset += contributions[p];
    } else {
      g.bound -= contributions[p];
      if (g.op == GlobalOp::kBetween) g.upper -= contributions[p];
    }
  }
  return out;
}

double approximation_ratio(const EvalReport& direct,
                           const EvalReport& sketch_refine,
                           Direction direction) {
  if (direct.status != EvalStatus::kFeasible || !direct.package ||
      sketch_refine.status != EvalStatus::kFeasible || !sketch_refine.package) {
    throw ValidationError("approximation ratio needs two feasible reports");
  }
  const double d = direct.package->objective_value;
  const double s = sketch_refine.package->objective_value;
  const double numerator = direction == Direction::kMaximize ? d : s;
  const double denominator = direction == Direction::kMaximize ? s : d;
  if (denominator == 0.0) {
    if (numerator == 0.0) return 1.0;
    throw std::domain_error("approximation ratio has a zero denominator");
  }
  return numerator / denominator;
}

EvalReport eval_direct(const PackageQuery& query, const Relation& relation,
                       const EvalConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto ms_since = [](Clock::time_point t) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
  };
  EvalReport report;
  report.method = Method::kDirect;
  const PackageQuery q =
      query.validated ? query : validate(query, relation.schema());

  const auto t0 = Clock::now();
  IlpModel model = derive_bounds(translate(q, relation));
  report.timings.translate_ms = ms_since(t0);

  const BranchAndBoundSolver fallback;
  const Solver& solver = config.solver_impl ? *config.solver_impl : fallback;
  const auto t1 = Clock::now();
  const SolveResult result = solver.solve(model, config.solver);
  report.timings.solve_ms = ms_since(t1);
  report.timings.total_ms = ms_since(t0);
  report.subproblems = 1;

  switch (result.status) {
    case SolveStatus::kOptimal: report.status = EvalStatus::kFeasible; break;
    case SolveStatus::kInfeasible: report.status = EvalStatus::kInfeasible; break;
    case SolveStatus::kTimeLimit: report.status = EvalStatus::kTimeLimit; break;
    case SolveStatus::kUnbounded:
      throw UnboundedError("unbounded: solver reported an unbounded model");
  }
  if (result.solution) {
    Package package;
    for (std::size_t i = 0; i < result.solution->size(); ++i) {
      const std::int64_t mult = (*result.solution)[i];
      if (mult > 0) package.entries[model.variables[i].tuple_id] = mult;
    }
    if (q.objective) {
      package.objective_value = aggregate(q.objective->expr, relation, package);
      const double solver_value = result.objective.value_or(0.0);
      if (std::abs(package.objective_value - solver_value) >
          1e-6 * std::max(1.0, std::abs(solver_value))) {
        report.flags.push_back(kFlagObjectiveMismatch);
      }
    }
    report.package = std::move(package);
  }
  return report;
}

}  // namespace paql
