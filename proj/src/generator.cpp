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

#include "paql/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "paql/error.hpp"

namespace paql {

Relation generate_relation(const DataParams& params) {
  if (params.rows == 0 || params.cols == 0) {
    throw ValidationError("generator needs at least one row and one column");
  }
  if (!std::isfinite(params.lo) || !std::isfinite(params.hi)) {
    throw ValidationError("distribution parameters must be finite");
  }
  if (params.distribution == Distribution::kUniform && !(params.hi > params.lo)) {
    throw ValidationError("uniform range needs hi > lo");
  }
  if (params.distribution == Distribution::kNormal && !(params.hi > 0.0)) {
    throw ValidationError("normal distribution needs a positive deviation");
  }
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> uniform(params.lo, params.hi);
  std::normal_distribution<double> normal(params.lo, params.hi);

  std::vector<Attribute> attrs;
  std::vector<Column> columns(params.cols);
  for (std::size_t c = 0; c < params.cols; ++c) {
    attrs.push_back({"attr_" + std::to_string(c + 1), AttributeKind::kNumeric});
    columns[c].numbers.reserve(params.rows);
  }
  // Row-major draw order so that adding columns changes every value; the
  // point is only reproducibility per parameter set.
  for (std::size_t r = 0; r < params.rows; ++r) {
    for (std::size_t c = 0; c < params.cols; ++c) {
      double v = params.distribution == Distribution::kUniform ? uniform(rng)
                                                               : normal(rng);
      if (params.clamp_min) v = std::max(v, *params.clamp_min);
      columns[c].numbers.push_back(v);
    }
  }
  return Relation(Schema(params.name, std::move(attrs)), std::move(columns));
}

std::vector<PackageQuery> generate_workload(const Relation& relation,
                                            const WorkloadParams& params) {
  std::vector<std::string> numeric;
  for (const Attribute& a : relation.schema().attributes()) {
    if (a.kind == AttributeKind::kNumeric) numeric.push_back(a.name);
  }
  if (numeric.empty()) {
    throw ValidationError("workload generation needs a numeric attribute");
  }
  if (params.min_expected_size < 1 ||
      params.max_expected_size < params.min_expected_size ||
      params.min_constraints < 1 ||
      params.max_constraints < params.min_constraints || params.repeat < 0) {
    throw ValidationError("invalid workload parameters");
  }
  const std::vector<AttributeStats> stats = attribute_stats(relation, numeric);
  std::mt19937_64 rng(params.seed);

  std::vector<PackageQuery> out;
  for (std::size_t i = 0; i < params.queries; ++i) {
    PackageQuery q;
    q.package_sources = {"R"};
    q.package_name = "P";
    q.relation_name = relation.name();
    q.relation_alias = "R";
    q.repeat = params.repeat;

    GlobalPredicate count;
    count.lhs = AggregateExpr::count_star();
    count.lhs.qualifier = "P";
    count.op = GlobalOp::kGe;
    count.bound = 1.0;
    q.global_predicates.push_back(count);

    const auto expected = static_cast<double>(
        std::uniform_int_distribution<std::size_t>(params.min_expected_size,
                                                   params.max_expected_size)(rng));
    const std::size_t wanted =
        std::min(numeric.size(),
                 std::uniform_int_distribution<std::size_t>(
                     params.min_constraints, params.max_constraints)(rng));
    std::vector<std::size_t> order(numeric.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const Direction direction = std::bernoulli_distribution(0.5)(rng)
                                    ? Direction::kMaximize
                                    : Direction::kMinimize;
    // The first constraint keeps the objective from running away.
    const GlobalOp anchor =
        direction == Direction::kMaximize ? GlobalOp::kLe : GlobalOp::kGe;
    for (std::size_t c = 0; c < wanted; ++c) {
      const std::size_t a = order[c];
      GlobalPredicate g;
      g.lhs = AggregateExpr::sum(numeric[a]);
      g.lhs.qualifier = "P";
      g.op = c == 0 ? anchor
                    : (std::bernoulli_distribution(0.5)(rng) ? GlobalOp::kLe
                                                             : GlobalOp::kGe);
      const double value =
          stats[a].max > stats[a].min
              ? std::uniform_real_distribution<double>(stats[a].min,
                                                       stats[a].max)(rng)
              : stats[a].min;
      g.bound = value * expected;
      q.global_predicates.push_back(std::move(g));
    }
    // Prefer an attribute no constraint uses: "maximize SUM(a) subject to
    // SUM(a) <= v" only asks for a subset sum closest to v.
    const std::size_t free_attrs = numeric.size() - wanted;
    const std::size_t objective_attr =
        free_attrs > 0
            ? order[wanted + std::uniform_int_distribution<std::size_t>(
                                 0, free_attrs - 1)(rng)]
            : std::uniform_int_distribution<std::size_t>(0, numeric.size() - 1)(rng);
    Objective objective{direction, AggregateExpr::sum(numeric[objective_attr])};
    objective.expr.qualifier = "P";
    q.objective = std::move(objective);
    out.push_back(std::move(q));
  }
  return out;
}

RawIlp generate_raw_ilp(const RawIlpParams& params) {
  if (params.n == 0 || params.k == 0 ||
      params.max_coefficient < params.min_coefficient) {
    throw ValidationError("invalid random ILP parameters");
  }
  if (params.bounded && params.max_coefficient < 1) {
    throw ValidationError("a bounded ILP needs positive coefficients");
  }
  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::int64_t> coef(params.min_coefficient,
                                                   params.max_coefficient);
  std::uniform_int_distribution<std::int64_t> positive(
      1, std::max<std::int64_t>(1, params.max_coefficient));
  RawIlp ilp;
  ilp.a.resize(params.n);
  ilp.b.assign(params.n, std::vector<double>(params.k));
  ilp.c.resize(params.k);
  for (std::size_t i = 0; i < params.n; ++i) {
    ilp.a[i] = static_cast<double>(coef(rng));
    for (std::size_t j = 0; j < params.k; ++j) {
      ilp.b[i][j] = static_cast<double>(
          params.bounded && j == 0 ? positive(rng) : coef(rng));
    }
  }
  std::uniform_int_distribution<std::int64_t> rhs(
      0, std::max<std::int64_t>(1, params.max_coefficient) *
             static_cast<std::int64_t>(params.n) / 2);
  for (std::size_t j = 0; j < params.k; ++j) {
    std::int64_t v = rhs(rng);
    if (!(params.bounded && j == 0) && std::bernoulli_distribution(0.2)(rng)) {
      v = -v / 2;
    }
    ilp.c[j] = static_cast<double>(v);
  }
  return ilp;
}

}  // namespace paql
