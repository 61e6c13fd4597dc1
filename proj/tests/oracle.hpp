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

// Test-side reference semantics. Everything here evaluates packages by
// aggregating over the tuples directly; nothing goes through the ILP
// translation, the solvers or the library's predicate evaluation.

#ifndef PAQL_TESTS_ORACLE_HPP_
#define PAQL_TESTS_ORACLE_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "paql/evaluator.hpp"
#include "paql/partitioner.hpp"
#include "paql/query.hpp"
#include "paql/relation.hpp"

namespace oracle {

using paql::AggregateExpr;
using paql::AggregateKind;
using paql::GlobalOp;
using paql::GlobalPredicate;
using paql::PackageQuery;
using paql::Relation;
using paql::TupleId;

// Dense multiplicities, one per tuple of the relation.
using Counts = std::vector<std::int64_t>;

inline bool compare(const paql::Value& lhs, paql::CompareOp op,
                    const paql::Value& rhs) {
  using paql::CompareOp;
  if (lhs.index() != rhs.index()) return false;
  const int c = lhs < rhs ? -1 : (rhs < lhs ? 1 : 0);
  switch (op) {
    case CompareOp::kEq: return c == 0;
    case CompareOp::kNe: return c != 0;
    case CompareOp::kLt: return c < 0;
    case CompareOp::kLe: return c <= 0;
    case CompareOp::kGt: return c > 0;
    case CompareOp::kGe: return c >= 0;
  }
  return false;
}

inline paql::Value cell(const Relation& rel, const std::string& attr,
                        TupleId id) {
  const std::size_t a = *rel.schema().index_of(attr);
  if (rel.schema().attribute(a).kind == paql::AttributeKind::kNumeric) {
    return rel.column(a).numbers[id];
  }
  return rel.column(a).labels[id];
}

inline bool passes(const Relation& rel, TupleId id,
                   const paql::BasePredicate& p) {
  for (const paql::Comparison& c : p.conjuncts) {
    if (!compare(cell(rel, c.attribute, id), c.op, c.value)) return false;
  }
  return true;
}

struct Aggregate {
  long double sum = 0.0L;  // SUM, COUNT or the AVG numerator
  std::int64_t count = 0;  // units aggregated (AVG denominator)
};

inline Aggregate aggregate(const AggregateExpr& e, const Relation& rel,
                           const Counts& x) {
  Aggregate out;
  for (TupleId id = 0; id < x.size(); ++id) {
    if (x[id] == 0) continue;
    switch (e.kind) {
      case AggregateKind::kCountStar:
        out.sum += x[id];
        break;
      case AggregateKind::kFilteredCount:
        if (passes(rel, id, e.filter)) out.sum += x[id];
        break;
      case AggregateKind::kSum:
      case AggregateKind::kAvg:
        out.sum += static_cast<long double>(
                       std::get<double>(cell(rel, e.attribute, id))) * x[id];
        break;
    }
    out.count += x[id];
  }
  return out;
}

// One validated global predicate. AVG over an empty package is undefined;
// the engine treats it as satisfying any bound.
inline bool holds(const GlobalPredicate& g, const Relation& rel,
                  const Counts& x, long double tol = 1e-9L) {
  const Aggregate lhs = aggregate(g.lhs, rel, x);
  long double left = lhs.sum + g.offset;
  long double right = g.bound;
  if (g.lhs.kind == AggregateKind::kAvg) {
    if (lhs.count == 0) {
      // Only a refine-style offset can make the empty package fail.
      left = g.offset;
      right = 0.0L;
    } else {
      left = lhs.sum / lhs.count + g.offset / lhs.count;
    }
  }
  if (g.rhs_count) right += aggregate(*g.rhs_count, rel, x).sum;
  switch (g.op) {
    case GlobalOp::kLe: return left <= right + tol;
    case GlobalOp::kGe: return left >= right - tol;
    case GlobalOp::kEq: return std::fabs(left - right) <= tol;
    case GlobalOp::kBetween:
      return left >= right - tol && left <= g.upper + tol;
  }
  return false;
}

inline bool satisfies(const PackageQuery& q, const Relation& rel,
                      const Counts& x, long double tol = 1e-9L) {
  for (TupleId id = 0; id < x.size(); ++id) {
    if (x[id] < 0) return false;
    if (x[id] == 0) continue;
    if (q.max_multiplicity() && x[id] > *q.max_multiplicity()) return false;
    if (q.base_predicate && !passes(rel, id, *q.base_predicate)) return false;
  }
  for (const GlobalPredicate& g : q.global_predicates) {
    if (!holds(g, rel, x, tol)) return false;
  }
  return true;
}

inline double objective(const PackageQuery& q, const Relation& rel,
                        const Counts& x) {
  if (!q.objective) return 0.0;
  return static_cast<double>(aggregate(q.objective->expr, rel, x).sum);
}

inline Counts dense(const paql::Package& p, std::size_t n) {
  Counts x(n, 0);
  for (const auto& [id, m] : p.entries) x.at(id) = m;
  return x;
}

struct Best {
  bool feasible = false;
  double objective = 0.0;
};

// Exhaustive search over multiplicities 0..cap for tuples passing the base
// predicate (cap = REPEAT + 1, or `default_cap` without REPEAT).
inline Best enumerate(const PackageQuery& q, const Relation& rel,
                      std::int64_t default_cap = 2) {
  const std::int64_t cap = q.max_multiplicity().value_or(default_cap);
  std::vector<TupleId> free;
  for (TupleId id = 0; id < rel.size(); ++id) {
    if (!q.base_predicate || passes(rel, id, *q.base_predicate)) {
      free.push_back(id);
    }
  }
  Counts x(rel.size(), 0);
  Best best;
  const bool maximize =
      !q.objective || q.objective->direction == paql::Direction::kMaximize;
  while (true) {
    if (satisfies(q, rel, x)) {
      const double v = objective(q, rel, x);
      if (!best.feasible || (maximize ? v > best.objective : v < best.objective)) {
        best = {true, v};
      }
    }
    std::size_t i = 0;
    while (i < free.size() && x[free[i]] == cap) x[free[i++]] = 0;
    if (i == free.size()) break;
    ++x[free[i]];
  }
  return best;
}

// Random package in the selectivity sense: `size` tuples drawn uniformly
// with replacement.
inline Counts random_package(std::size_t n, std::size_t size,
                             std::mt19937_64& rng) {
  Counts x(n, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t s = 0; s < size; ++s) ++x[pick(rng)];
  return x;
}

// Random small relation: integer-valued numeric columns a, b and a
// categorical column c over {x, y, z}.
inline Relation random_relation(std::size_t n, std::mt19937_64& rng,
                                int lo = -5, int hi = 10) {
  std::uniform_int_distribution<int> value(lo, hi);
  std::uniform_int_distribution<int> label(0, 2);
  std::vector<paql::Column> cols(3);
  for (std::size_t i = 0; i < n; ++i) {
    cols[0].numbers.push_back(value(rng));
    cols[1].numbers.push_back(value(rng));
    cols[2].labels.push_back(std::string(1, "xyz"[label(rng)]));
  }
  return Relation(paql::Schema("T", {{"a", paql::AttributeKind::kNumeric},
                                     {"b", paql::AttributeKind::kNumeric},
                                     {"c", paql::AttributeKind::kCategorical}}),
                  std::move(cols));
}

// Random PaQL text over random_relation's schema, mixing every aggregate
// form. Bounds are halves so boundary cases are exact.
inline std::string random_query_text(std::mt19937_64& rng, int repeat) {
  std::uniform_int_distribution<int> pick(0, 99);
  auto half = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(2 * lo, 2 * hi)(rng) / 2.0;
  };
  const char* ops[] = {"<=", ">=", "="};
  std::ostringstream out;
  out << "SELECT PACKAGE(T) AS P FROM T REPEAT " << repeat;
  if (pick(rng) < 30) {
    out << " WHERE T.a " << (pick(rng) < 50 ? ">=" : "<>") << " " << pick(rng) % 6
        << (pick(rng) < 50 ? " AND T.c <> 'z'" : "");
  }
  out << " SUCH THAT ";
  const int terms = 1 + pick(rng) % 3;
  for (int t = 0; t < terms; ++t) {
    if (t > 0) out << " AND ";
    const int kind = pick(rng) % 6;
    const char* op = ops[pick(rng) % 3];
    switch (kind) {
      case 0:
        out << "COUNT(P.*) " << op << " " << 1 + pick(rng) % 5;
        break;
      case 1:
        out << "SUM(P.a) " << op << " " << half(-5, 25);
        break;
      case 2:
        out << "SUM(P.b) BETWEEN " << half(-5, 5) << " AND " << half(5, 30);
        break;
      case 3:
        out << "AVG(P.b) " << op << " " << half(-2, 8);
        break;
      case 4:
        out << "(SELECT COUNT(*) FROM P WHERE P.c = '" << "xyz"[pick(rng) % 3]
            << "') " << op << " " << pick(rng) % 3;
        break;
      default:
        out << "COUNT(P.*) - 1 " << op << " " << pick(rng) % 4;
        break;
    }
  }
  const int obj = pick(rng) % 5;
  if (obj < 4) {
    out << (obj % 2 ? " MAXIMIZE " : " MINIMIZE ")
        << (obj < 2 ? "SUM(P.a)" : "COUNT(P.*)");
  }
  return out.str();
}

// Recomputes the partitioning contract from the data: exact cover of the
// assigned tuples, centroids equal to member means (1e-9 relative), and
// |G| <= tau, r <= omega for non-degenerate groups. Degenerate groups must
// be oversized groups of coinciding tuples. Returns the problems found.
inline std::vector<std::string> partition_problems(const paql::Partitioning& p,
                                                   const Relation& rel) {
  std::vector<std::string> bad;
  const auto note = [&](const std::string& s) {
    if (bad.size() < 10) bad.push_back(s);
  };
  if (p.gid.size() != rel.size()) {
    note("gid length differs from relation size");
    return bad;
  }
  std::vector<std::size_t> cols;
  for (const std::string& a : p.attrs) cols.push_back(*rel.schema().index_of(a));
  std::size_t members_total = 0;
  for (std::size_t g = 0; g < p.num_groups(); ++g) {
    const auto& mem = p.members[g];
    const std::string tag = "group " + std::to_string(g);
    if (mem.empty()) note(tag + " is empty");
    if (!std::is_sorted(mem.begin(), mem.end())) note(tag + " members unsorted");
    members_total += mem.size();
    for (TupleId id : mem) {
      if (id >= rel.size() || p.gid[id] != g) note(tag + " member gid mismatch");
    }
    if (mem.empty()) continue;
    long double radius = 0.0L;
    bool coincide = true;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      long double sum = 0.0L;
      for (TupleId id : mem) sum += rel.numeric(cols[c], id);
      const long double mean = sum / static_cast<long double>(mem.size());
      const long double rep = p.representatives[g][c];
      if (std::fabs(rep - mean) > 1e-9L * std::fabs(mean) + 1e-15L) {
        note(tag + " centroid differs from mean on " + p.attrs[c]);
      }
      const double first = rel.numeric(cols[c], mem.front());
      for (TupleId id : mem) {
        const double v = rel.numeric(cols[c], id);
        radius = std::max(radius, std::fabs(v - mean));
        if (v != first) coincide = false;
      }
    }
    const bool degenerate = std::binary_search(p.degenerate.begin(),
                                               p.degenerate.end(), g);
    if (degenerate) {
      if (!coincide) note(tag + " flagged degenerate but members differ");
      if (mem.size() <= p.tau) note(tag + " flagged degenerate but small");
      continue;
    }
    if (mem.size() > p.tau) note(tag + " exceeds tau");
    if (radius > p.omega + 1e-12L * std::max(1.0L, std::fabs(radius))) {
      note(tag + " radius exceeds omega");
    }
  }
  std::size_t assigned = 0;
  for (std::size_t g : p.gid) {
    if (g != paql::Partitioning::kUnassigned) {
      ++assigned;
      if (g >= p.num_groups()) note("gid out of range");
    }
  }
  if (assigned != members_total) note("members do not cover assigned tuples");
  if (!std::is_sorted(p.degenerate.begin(), p.degenerate.end())) {
    note("degenerate list unsorted");
  }
  return bad;
}

}  // namespace oracle

#endif  // PAQL_TESTS_ORACLE_HPP_
