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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "paql/error.hpp"
#include "paql/query.hpp"

namespace paql {

std::string_view to_string(GlobalOp op) {
  switch (op) {
    case GlobalOp::kLe: return "<=";
    case GlobalOp::kGe: return ">=";
    case GlobalOp::kEq: return "=";
    case GlobalOp::kBetween: return "BETWEEN";
  }
  return "?";
}

namespace {

std::string format_number(double v) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, end);
}

bool is_reserved(std::string_view word) {
  static const std::set<std::string, std::less<>> kReserved = {
      "SELECT", "PACKAGE", "AS",  "FROM",  "REPEAT",   "WHERE",
      "SUCH",   "THAT",    "AND", "OR",    "BETWEEN",  "MINIMIZE",
      "MAXIMIZE", "COUNT", "SUM", "AVG",   "MIN",      "MAX"};
  std::string up(word);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return kReserved.contains(up);
}

std::string ident(std::string_view name) {
  bool plain = !name.empty() &&
               (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') plain = false;
  }
  if (plain && !is_reserved(name)) return std::string(name);
  return "\"" + std::string(name) + "\"";
}

std::string qualified(const std::string& qualifier, const std::string& name) {
  return qualifier.empty() ? ident(name) : ident(qualifier) + "." + ident(name);
}

std::string format_literal(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return format_number(*d);
  std::string out = "'";
  for (char c : std::get<std::string>(v)) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string format_conjunction(const BasePredicate& p) {
  std::string out;
  for (std::size_t i = 0; i < p.conjuncts.size(); ++i) {
    const Comparison& c = p.conjuncts[i];
    if (i) out += " AND ";
    out += qualified(c.qualifier, c.attribute);
    out += " ";
    out += to_string(c.op);
    out += " ";
    out += format_literal(c.value);
  }
  return out;
}

std::string format_aggregate(const AggregateExpr& e,
                             const std::string& package_name) {
  switch (e.kind) {
    case AggregateKind::kCountStar:
      return e.qualifier.empty() ? "COUNT(*)"
                                 : "COUNT(" + ident(e.qualifier) + ".*)";
    case AggregateKind::kSum:
      return "SUM(" + qualified(e.qualifier, e.attribute) + ")";
    case AggregateKind::kAvg:
      return "AVG(" + qualified(e.qualifier, e.attribute) + ")";
    case AggregateKind::kFilteredCount: {
      const std::string& source =
          e.qualifier.empty() ? package_name : e.qualifier;
      return "(SELECT COUNT(*) FROM " + ident(source) + " WHERE " +
             format_conjunction(e.filter) + ")";
    }
  }
  return "?";
}

std::string format_offset(double offset) {
  if (offset == 0.0) return "";
  if (offset < 0.0) return " - " + format_number(-offset);
  return " + " + format_number(offset);
}

}  // namespace

std::string to_paql(const PackageQuery& q) {
  std::ostringstream out;
  out << "SELECT PACKAGE(";
  for (std::size_t i = 0; i < q.package_sources.size(); ++i) {
    if (i) out << ", ";
    out << ident(q.package_sources[i]);
  }
  out << ") AS " << ident(q.package_name) << "\n";
  out << "FROM " << ident(q.relation_name);
  if (!q.relation_alias.empty()) out << " " << ident(q.relation_alias);
  if (q.repeat) out << " REPEAT " << *q.repeat;
  out << "\n";
  if (q.base_predicate && !q.base_predicate->conjuncts.empty()) {
    out << "WHERE " << format_conjunction(*q.base_predicate) << "\n";
  }
  if (!q.global_predicates.empty()) {
    out << "SUCH THAT";
    for (std::size_t i = 0; i < q.global_predicates.size(); ++i) {
      const GlobalPredicate& g = q.global_predicates[i];
      out << (i ? " AND\n    " : "\n    ");
      out << format_aggregate(g.lhs, q.package_name) << format_offset(g.offset);
      if (g.op == GlobalOp::kBetween) {
        out << " BETWEEN " << format_number(g.bound) << " AND "
            << format_number(g.upper);
      } else if (g.rhs_count) {
        out << " " << to_string(g.op) << " "
            << format_aggregate(*g.rhs_count, q.package_name)
            << format_offset(g.bound);
      } else {
        out << " " << to_string(g.op) << " " << format_number(g.bound);
      }
    }
    out << "\n";
  }
  if (q.objective) {
    out << (q.objective->direction == Direction::kMinimize ? "MINIMIZE "
                                                           : "MAXIMIZE ")
        << format_aggregate(q.objective->expr, q.package_name) << "\n";
  }
  return out.str();
}

namespace {

class Validator {
 public:
  Validator(const PackageQuery& q, const Schema& schema)
      : q_(q), schema_(schema) {}

  PackageQuery run() {
    PackageQuery out = q_;
    if (out.package_sources.size() != 1) {
      throw ValidationError(
          "unsupported: PACKAGE(...) must name exactly one relation alias");
    }
    if (out.package_sources[0] != q_.relation_alias &&
        out.package_sources[0] != q_.relation_name) {
      throw ValidationError("PACKAGE(" + out.package_sources[0] +
                            ") does not name the FROM relation");
    }
    if (out.repeat && *out.repeat < 0) {
      throw ValidationError("REPEAT must be non-negative");
    }
    if (out.base_predicate) {
      for (Comparison& c : out.base_predicate->conjuncts) {
        check_relation_qualifier(c.qualifier, c.attribute);
        c.qualifier.clear();
      }
      check_base_predicate(*out.base_predicate, schema_);
      if (out.base_predicate->conjuncts.empty()) out.base_predicate.reset();
    }

    std::vector<GlobalPredicate> lowered;
    for (GlobalPredicate g : out.global_predicates) {
      normalize(g.lhs);
      if (!q_.validated && g.lhs.kind == AggregateKind::kAvg &&
          g.offset != 0.0) {
        // "AVG(a) + c <= v" is "AVG(a) <= v - c"; offsets of validated
        // predicates live in the linearized space.
        g.bound -= g.offset;
        g.upper -= g.offset;
        g.offset = 0.0;
      }
      if (g.rhs_count) normalize(*g.rhs_count);
      if (g.op == GlobalOp::kBetween) {
        if (g.bound > g.upper) {
          throw ValidationError("BETWEEN requires lower bound <= upper bound");
        }
        GlobalPredicate lower = g;
        lower.op = GlobalOp::kGe;
        lower.upper = 0.0;
        GlobalPredicate upper = g;
        upper.op = GlobalOp::kLe;
        upper.bound = g.upper;
        upper.upper = 0.0;
        lowered.push_back(std::move(lower));
        lowered.push_back(std::move(upper));
      } else {
        lowered.push_back(std::move(g));
      }
    }
    out.global_predicates = std::move(lowered);

    if (out.objective) {
      normalize(out.objective->expr);
      if (out.objective->expr.kind == AggregateKind::kAvg) {
        throw ValidationError("unsupported: AVG objective is not linear");
      }
    }
    out.validated = true;
    return out;
  }

 private:
  void check_relation_qualifier(const std::string& qualifier,
                                const std::string& attribute) const {
    if (qualifier.empty() || qualifier == q_.relation_alias ||
        qualifier == q_.relation_name) {
      return;
    }
    throw ValidationError("unknown qualifier '" + qualifier + "' on '" +
                          attribute + "'");
  }

  void check_package_qualifier(const std::string& qualifier) const {
    if (qualifier.empty() || qualifier == q_.package_name ||
        qualifier == q_.relation_alias) {
      return;
    }
    throw ValidationError("aggregate refers to unknown package '" + qualifier +
                          "'");
  }

  void normalize(AggregateExpr& e) const {
    check_package_qualifier(e.qualifier);
    e.qualifier.clear();
    switch (e.kind) {
      case AggregateKind::kCountStar:
        break;
      case AggregateKind::kSum:
      case AggregateKind::kAvg: {
        const std::size_t index = schema_.require(e.attribute);
        if (schema_.attribute(index).kind != AttributeKind::kNumeric) {
          throw ValidationError(
              std::string(e.kind == AggregateKind::kSum ? "SUM" : "AVG") +
              " over categorical attribute '" + e.attribute + "'");
        }
        break;
      }
      case AggregateKind::kFilteredCount:
        for (Comparison& c : e.filter.conjuncts) {
          check_package_qualifier(c.qualifier);
          c.qualifier.clear();
        }
        check_base_predicate(e.filter, schema_);
        if (e.filter.conjuncts.empty()) e.kind = AggregateKind::kCountStar;
        break;
    }
  }

  const PackageQuery& q_;
  const Schema& schema_;
};

void collect(const AggregateExpr& e, std::vector<std::string>& out) {
  auto add = [&out](const std::string& name) {
    if (std::find(out.begin(), out.end(), name) == out.end()) {
      out.push_back(name);
    }
  };
  switch (e.kind) {
    case AggregateKind::kSum:
    case AggregateKind::kAvg:
      add(e.attribute);
      break;
    case AggregateKind::kFilteredCount:
      for (const Comparison& c : e.filter.conjuncts) {
        if (std::holds_alternative<double>(c.value)) add(c.attribute);
      }
      break;
    case AggregateKind::kCountStar:
      break;
  }
}

}  // namespace

PackageQuery validate(const PackageQuery& query, const Schema& schema) {
  return Validator(query, schema).run();
}

std::vector<std::string> query_attributes(const PackageQuery& query) {
  std::vector<std::string> out;
  for (const GlobalPredicate& g : query.global_predicates) {
    collect(g.lhs, out);
    if (g.rhs_count) collect(*g.rhs_count, out);
  }
  if (query.objective) collect(query.objective->expr, out);
  return out;
}

}  // namespace paql
