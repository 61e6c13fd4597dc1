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

// Integer linear programs derived from package queries.
//
// Every candidate tuple t_i becomes a non-negative integer variable x_i (its
// multiplicity in the package). Global predicates become linear rows:
//
//   COUNT(P.*)  op v   ->  sum x_i               op v
//   SUM(P.a)    op v   ->  sum t_i.a * x_i       op v
//   AVG(P.a)    op v   ->  sum (t_i.a - v) * x_i op 0
//   COUNT_c op COUNT_p ->  sum (1_c(t_i) - 1_p(t_i)) * x_i op 0
//
// Tuples failing the base predicate get no variable at all.

#ifndef PAQL_ILP_HPP_
#define PAQL_ILP_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paql/query.hpp"
#include "paql/relation.hpp"

namespace paql {

enum class RowSense { kLe, kGe, kEq };

std::string_view to_string(RowSense sense);

struct Variable {
  TupleId tuple_id = 0;
  std::int64_t lower = 0;
  // Absent means +infinity.
  std::optional<std::int64_t> upper;

  bool operator==(const Variable&) const = default;
};

struct LinearConstraint {
  // Dense, aligned with IlpModel::variables.
  std::vector<double> coefficients;
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
  // Index of the validated global predicate this row encodes; -1 for rows
  // that do not come from the query.
  int provenance = -1;

  bool operator==(const LinearConstraint&) const = default;
};

struct IlpModel {
  std::vector<Variable> variables;
  std::vector<LinearConstraint> constraints;
  Direction direction = Direction::kMaximize;
  // Dense, aligned with variables. All zero for the vacuous objective.
  std::vector<double> objective;

  std::size_t num_variables() const { return variables.size(); }
  bool bounded() const;
};

// Linear form of one validated global predicate (or objective) over the
// tuples of a relation: per-tuple coefficient, row sense and right-hand side.
class LinearForm {
 public:
  static LinearForm of_predicate(const GlobalPredicate& predicate,
                                 const Schema& schema);
  static LinearForm of_objective(const AggregateExpr& expr,
                                 const Schema& schema);

  double coefficient(const Relation& relation, TupleId id) const;
  RowSense sense() const { return sense_; }
  double rhs() const { return rhs_; }

 private:
  struct Term {
    AggregateKind kind = AggregateKind::kCountStar;
    std::size_t attribute = 0;
    double shift = 0.0;  // subtracted from the attribute (AVG)
    BasePredicate filter;  // filtered counts
    double sign = 1.0;
  };
  static Term make_term(const AggregateExpr& expr, const Schema& schema,
                        double avg_threshold, double sign);

  std::vector<Term> terms_;
  RowSense sense_ = RowSense::kLe;
  double rhs_ = 0.0;
};

// Builds the ILP for a validated query over the whole relation or over the
// given candidate tuples (ids into `relation`, any order). Variables appear in
// candidate order; candidates failing the base predicate are dropped.
IlpModel translate(const PackageQuery& query, const Relation& relation);
IlpModel translate(const PackageQuery& query, const Relation& relation,
                   std::span<const TupleId> candidates);

// Gives every unbounded variable the tightest upper bound implied by a row
// sum a_i x_i <= U with all a_i >= 0 (or the mirrored >= form) and a_i > 0
// for that variable. Throws UnboundedError when some variable has none.
IlpModel derive_bounds(IlpModel model);

// True iff x is within bounds and satisfies every row. Rows whose
// coefficients and rhs are all integral are checked exactly; others with an
// absolute slack tolerance of `tolerance`. Throws std::invalid_argument on
// length mismatch.
bool feasible(const IlpModel& model, std::span<const std::int64_t> x,
              double tolerance = 1e-9);

double objective_value(const IlpModel& model, std::span<const std::int64_t> x);

// Human-readable LP-style dump, for debugging.
void write_lp(const IlpModel& model, std::ostream& out);

// ---------------------------------------------------------------------------
// Generic ILP  <->  package query.

// max sum a_i x_i  s.t.  sum_i b_ij x_i <= c_j (j < k),  x_i >= 0 integer.
struct RawIlp {
  std::vector<double> a;               // n objective coefficients
  std::vector<std::vector<double>> b;  // n rows of k coefficients
  std::vector<double> c;               // k right-hand sides

  std::size_t n() const { return a.size(); }
  std::size_t k() const { return c.size(); }
};

RawIlp parse_raw_ilp(std::string_view json_text);
RawIlp load_raw_ilp(const std::string& path);
std::string to_json(const RawIlp& ilp);

// Relation R(attr_obj, attr_1..attr_k) with one tuple per ILP column, and the
// query "SUCH THAT SUM(P.attr_j) <= c_j ... MAXIMIZE SUM(P.attr_obj)" with no
// REPEAT clause. The query is returned unvalidated, as parsed.
std::pair<Relation, PackageQuery> ilp_to_paql(const RawIlp& ilp);

}  // namespace paql

#endif  // PAQL_ILP_HPP_
