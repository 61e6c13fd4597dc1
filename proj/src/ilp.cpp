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

#include "paql/ilp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "paql/error.hpp"

namespace paql {

std::string_view to_string(RowSense sense) {
  switch (sense) {
    case RowSense::kLe: return "<=";
    case RowSense::kGe: return ">=";
    case RowSense::kEq: return "=";
  }
  return "?";
}

bool IlpModel::bounded() const {
  for (const Variable& v : variables) {
    if (!v.upper) return false;
  }
  return true;
}

LinearForm::Term LinearForm::make_term(const AggregateExpr& expr,
                                       const Schema& schema,
                                       double avg_threshold, double sign) {
  Term t;
  t.kind = expr.kind;
  t.sign = sign;
  switch (expr.kind) {
    case AggregateKind::kCountStar:
      break;
    case AggregateKind::kSum:
      t.attribute = schema.require(expr.attribute);
      break;
    case AggregateKind::kAvg:
      t.attribute = schema.require(expr.attribute);
      t.shift = avg_threshold;
      break;
    case AggregateKind::kFilteredCount:
      t.filter = expr.filter;
      break;
  }
  return t;
}

LinearForm LinearForm::of_predicate(const GlobalPredicate& g,
                                    const Schema& schema) {
  LinearForm f;
  switch (g.op) {
    case GlobalOp::kLe: f.sense_ = RowSense::kLe; break;
    case GlobalOp::kGe: f.sense_ = RowSense::kGe; break;
    case GlobalOp::kEq: f.sense_ = RowSense::kEq; break;
    case GlobalOp::kBetween:
      throw ValidationError("BETWEEN must be lowered by validate()");
  }
  if (g.lhs.kind == AggregateKind::kAvg) {
    if (g.rhs_count) {
      throw ValidationError("AVG cannot be compared with a count");
    }
    // AVG(a) op v  <=>  sum (a_i - v) x_i op 0.
    f.terms_.push_back(make_term(g.lhs, schema, g.bound, 1.0));
    f.rhs_ = -g.offset;
    return f;
  }
  f.terms_.push_back(make_term(g.lhs, schema, 0.0, 1.0));
  if (g.rhs_count) {
    f.terms_.push_back(make_term(*g.rhs_count, schema, 0.0, -1.0));
  }
  f.rhs_ = g.bound - g.offset;
  return f;
}

LinearForm LinearForm::of_objective(const AggregateExpr& expr,
                                    const Schema& schema) {
  if (expr.kind == AggregateKind::kAvg) {
    throw ValidationError("unsupported: AVG objective is not linear");
  }
  LinearForm f;
  f.terms_.push_back(make_term(expr, schema, 0.0, 1.0));
  return f;
}

double LinearForm::coefficient(const Relation& relation, TupleId id) const {
  double total = 0.0;
  for (const Term& t : terms_) {
    double v = 0.0;
    switch (t.kind) {
      case AggregateKind::kCountStar:
        v = 1.0;
        break;
      case AggregateKind::kSum:
        v = relation.numeric(t.attribute, id);
        break;
      case AggregateKind::kAvg:
        v = relation.numeric(t.attribute, id) - t.shift;
        break;
      case AggregateKind::kFilteredCount:
        v = satisfies(relation, id, t.filter) ? 1.0 : 0.0;
        break;
    }
    total += t.sign * v;
  }
  return total;
}

IlpModel translate(const PackageQuery& query, const Relation& relation) {
  std::vector<TupleId> all(relation.size());
  for (TupleId i = 0; i < all.size(); ++i) all[i] = i;
  return translate(query, relation, all);
}

IlpModel translate(const PackageQuery& query, const Relation& relation,
                   std::span<const TupleId> candidates) {
  if (!query.validated) {
    throw ValidationError("translate() requires a validated query");
  }
  IlpModel model;
  const std::optional<std::int64_t> upper = query.max_multiplicity();
  for (TupleId id : candidates) {
    if (id >= relation.size()) {
      throw std::out_of_range("candidate tuple id out of range");
    }
    if (query.base_predicate &&
        !satisfies(relation, id, *query.base_predicate)) {
      continue;
    }
    model.variables.push_back({id, 0, upper});
  }
  const std::size_t n = model.variables.size();
  const Schema& schema = relation.schema();

  for (std::size_t p = 0; p < query.global_predicates.size(); ++p) {
    const LinearForm form =
        LinearForm::of_predicate(query.global_predicates[p], schema);
    LinearConstraint row;
    row.coefficients.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      row.coefficients[i] =
          form.coefficient(relation, model.variables[i].tuple_id);
    }
    row.sense = form.sense();
    row.rhs = form.rhs();
    row.provenance = static_cast<int>(p);
    model.constraints.push_back(std::move(row));
  }

  model.objective.assign(n, 0.0);
  if (query.objective) {
    model.direction = query.objective->direction;
    const LinearForm form =
        LinearForm::of_objective(query.objective->expr, schema);
    for (std::size_t i = 0; i < n; ++i) {
      model.objective[i] =
          form.coefficient(relation, model.variables[i].tuple_id);
    }
  }
  return model;
}

namespace {

// Large enough for any realistic multiplicity, small enough that sums of a
// few of them do not overflow.
constexpr std::int64_t kMaxDerivedBound = std::int64_t{1} << 40;

void tighten_from(std::vector<Variable>& vars, std::vector<bool>& derived,
                  const std::vector<double>& a, double rhs, double sign) {
  for (double c : a) {
    if (sign * c < 0.0) return;
  }
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const double c = sign * a[i];
    if (c <= 0.0 || (vars[i].upper && !derived[i])) continue;
    double limit = std::floor(sign * rhs / c + 1e-9);
    limit = std::clamp(limit, 0.0, static_cast<double>(kMaxDerivedBound));
    const auto bound = static_cast<std::int64_t>(limit);
    if (!vars[i].upper || bound < *vars[i].upper) vars[i].upper = bound;
    derived[i] = true;
  }
}

}  // namespace

IlpModel derive_bounds(IlpModel model) {
  std::vector<bool> derived(model.variables.size(), false);
  for (const LinearConstraint& row : model.constraints) {
    if (row.sense != RowSense::kGe) {
      tighten_from(model.variables, derived, row.coefficients, row.rhs, 1.0);
    }
    if (row.sense != RowSense::kLe) {
      tighten_from(model.variables, derived, row.coefficients, row.rhs, -1.0);
    }
  }
  for (const Variable& v : model.variables) {
    if (!v.upper) {
      throw UnboundedError(
          "unbounded repetition: add REPEAT or a bounding global constraint");
    }
  }
  return model;
}

namespace {

bool integral(double v) {
  return std::abs(v) < 9.0e15 && v == std::floor(v);
}

bool compare(long double lhs, RowSense sense, long double rhs, double tol) {
  switch (sense) {
    case RowSense::kLe: return lhs <= rhs + tol;
    case RowSense::kGe: return lhs >= rhs - tol;
    case RowSense::kEq: return std::abs(lhs - rhs) <= tol;
  }
  return false;
}

}  // namespace

bool feasible(const IlpModel& model, std::span<const std::int64_t> x,
              double tolerance) {
  if (x.size() != model.num_variables()) {
    throw std::invalid_argument("multiplicity vector has length " +
                                std::to_string(x.size()) + ", model has " +
                                std::to_string(model.num_variables()) +
                                " variables");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Variable& v = model.variables[i];
    if (x[i] < v.lower) return false;
    if (v.upper && x[i] > *v.upper) return false;
  }
  for (const LinearConstraint& row : model.constraints) {
    bool exact = integral(row.rhs);
    for (std::size_t i = 0; exact && i < x.size(); ++i) {
      exact = integral(row.coefficients[i]);
    }
    if (exact) {
      __int128 lhs = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        lhs += static_cast<__int128>(static_cast<std::int64_t>(
                   row.coefficients[i])) *
               x[i];
      }
      const auto rhs = static_cast<__int128>(static_cast<std::int64_t>(row.rhs));
      const bool ok = row.sense == RowSense::kLe   ? lhs <= rhs
                      : row.sense == RowSense::kGe ? lhs >= rhs
                                                   : lhs == rhs;
      if (!ok) return false;
      continue;
    }
    long double lhs = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != 0) lhs += static_cast<long double>(row.coefficients[i]) * x[i];
    }
    if (!compare(lhs, row.sense, row.rhs, tolerance)) return false;
  }
  return true;
}

double objective_value(const IlpModel& model,
                       std::span<const std::int64_t> x) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < x.size() && i < model.objective.size(); ++i) {
    if (x[i] != 0) total += static_cast<long double>(model.objective[i]) * x[i];
  }
  return static_cast<double>(total);
}

namespace {

void write_terms(const std::vector<double>& coefficients, std::ostream& out) {
  bool first = true;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const double c = coefficients[i];
    if (c == 0.0) continue;
    if (first) {
      if (c < 0) out << "- ";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    if (std::abs(c) != 1.0) out << std::abs(c) << " ";
    out << "x" << i;
    first = false;
  }
  if (first) out << "0";
}

}  // namespace

void write_lp(const IlpModel& model, std::ostream& out) {
  out << (model.direction == Direction::kMaximize ? "Maximize" : "Minimize")
      << "\n obj: ";
  write_terms(model.objective, out);
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < model.constraints.size(); ++r) {
    const LinearConstraint& row = model.constraints[r];
    out << " c" << r << ": ";
    write_terms(row.coefficients, out);
    out << " " << to_string(row.sense) << " " << row.rhs << "\n";
  }
  out << "Bounds\n";
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const Variable& v = model.variables[i];
    out << " " << v.lower << " <= x" << i << " <= ";
    if (v.upper) {
      out << *v.upper;
    } else {
      out << "+inf";
    }
    out << "  \\ tuple " << v.tuple_id << "\n";
  }
  out << "General\n";
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    out << " x" << i << "\n";
  }
  out << "End\n";
}

RawIlp parse_raw_ilp(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("raw ILP: ") + e.what());
  }
  RawIlp ilp;
  try {
    ilp.a = doc.at("a").get<std::vector<double>>();
    ilp.b = doc.at("b").get<std::vector<std::vector<double>>>();
    ilp.c = doc.at("c").get<std::vector<double>>();
    if (doc.contains("n") && doc.at("n").get<std::size_t>() != ilp.a.size()) {
      throw DataError("raw ILP: n does not match length of a");
    }
    if (doc.contains("k") && doc.at("k").get<std::size_t>() != ilp.c.size()) {
      throw DataError("raw ILP: k does not match length of c");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("raw ILP: ") + e.what());
  }
  if (ilp.a.empty()) throw DataError("raw ILP: need at least one variable");
  if (ilp.b.size() != ilp.n()) {
    throw DataError("raw ILP: b must have one row per variable");
  }
  for (const auto& row : ilp.b) {
    if (row.size() != ilp.k()) {
      throw DataError("raw ILP: every row of b must have k entries");
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("raw ILP: non-finite b entry");
    }
  }
  for (double v : ilp.a) {
    if (!std::isfinite(v)) throw DataError("raw ILP: non-finite a entry");
  }
  for (double v : ilp.c) {
    if (!std::isfinite(v)) throw DataError("raw ILP: non-finite c entry");
  }
  return ilp;
}

RawIlp load_raw_ilp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_raw_ilp(text.str());
}

std::string to_json(const RawIlp& ilp) {
  nlohmann::json doc;
  doc["n"] = ilp.n();
  doc["k"] = ilp.k();
  doc["a"] = ilp.a;
  doc["b"] = ilp.b;
  doc["c"] = ilp.c;
  return doc.dump();
}

std::pair<Relation, PackageQuery> ilp_to_paql(const RawIlp& ilp) {
  std::vector<Attribute> attrs{{"attr_obj", AttributeKind::kNumeric}};
  for (std::size_t j = 0; j < ilp.k(); ++j) {
    attrs.push_back({"attr_" + std::to_string(j + 1), AttributeKind::kNumeric});
  }
  std::vector<Column> columns(attrs.size());
  columns[0].numbers = ilp.a;
  for (std::size_t j = 0; j < ilp.k(); ++j) {
    columns[j + 1].numbers.reserve(ilp.n());
    for (std::size_t i = 0; i < ilp.n(); ++i) {
      columns[j + 1].numbers.push_back(ilp.b[i][j]);
    }
  }
  Relation relation(Schema("ilp", std::move(attrs)), std::move(columns));

  PackageQuery q;
  q.package_sources = {"R"};
  q.package_name = "P";
  q.relation_name = "ilp";
  q.relation_alias = "R";
  for (std::size_t j = 0; j < ilp.k(); ++j) {
    GlobalPredicate g;
    g.lhs = AggregateExpr::sum("attr_" + std::to_string(j + 1));
    g.lhs.qualifier = "P";
    g.op = GlobalOp::kLe;
    g.bound = ilp.c[j];
    q.global_predicates.push_back(std::move(g));
  }
  Objective objective{Direction::kMaximize, AggregateExpr::sum("attr_obj")};
  objective.expr.qualifier = "P";
  q.objective = std::move(objective);
  return {std::move(relation), std::move(q)};
}

}  // namespace paql
