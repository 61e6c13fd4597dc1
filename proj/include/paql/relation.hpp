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

// In-memory storage for the single input relation of a package query.
//
// A Relation is column-oriented and immutable once constructed. Tuple ids are
// the 0-based row ordinals; every other module refers to tuples by id only.

#ifndef PAQL_RELATION_HPP_
#define PAQL_RELATION_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace paql {

using TupleId = std::size_t;

enum class AttributeKind { kNumeric, kCategorical };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kNumeric;

  bool operator==(const Attribute&) const = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws ValidationError on empty or duplicate attribute names, or when no
  // attribute is given.
  Schema(std::string name, std::vector<Attribute> attributes);

  const std::string& name() const { return name_; }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t arity() const { return attributes_.size(); }
  const Attribute& attribute(std::size_t index) const {
    return attributes_[index];
  }

  std::optional<std::size_t> index_of(std::string_view attribute) const;

  // Like index_of but throws ValidationError naming the missing attribute.
  std::size_t require(std::string_view attribute) const;

  bool operator==(const Schema&) const = default;

 private:
  std::string name_;
  std::vector<Attribute> attributes_;
};

using Value = std::variant<double, std::string>;

// A materialized row. Only used at API edges; the hot paths read columns.
struct Tuple {
  TupleId id = 0;
  std::vector<Value> values;
};

// Storage for one attribute. Exactly one of the vectors is populated,
// depending on the attribute kind.
struct Column {
  std::vector<double> numbers;
  std::vector<std::string> labels;
};

class Relation {
 public:
  Relation() = default;
  // Validates column lengths against each other and the schema, and that all
  // numeric values are finite.
  Relation(Schema schema, std::vector<Column> columns);

  const Schema& schema() const { return schema_; }
  const std::string& name() const { return schema_.name(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  double numeric(std::size_t attribute, TupleId id) const {
    return columns_[attribute].numbers[id];
  }
  const std::string& categorical(std::size_t attribute, TupleId id) const {
    return columns_[attribute].labels[id];
  }
  std::span<const double> numeric_column(std::size_t attribute) const {
    return columns_[attribute].numbers;
  }
  const Column& column(std::size_t attribute) const {
    return columns_[attribute];
  }

  Tuple tuple(TupleId id) const;

  // New relation holding the given tuples, renumbered 0..ids.size()-1 in the
  // order given.
  Relation select(std::span<const TupleId> ids) const;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t size_ = 0;
};

// Optional per-column kind overrides for load_csv, keyed by header name.
using SchemaHints = std::map<std::string, AttributeKind, std::less<>>;

// Reads a UTF-8, comma-separated file whose first row is the header. Column
// kinds are inferred (every non-empty cell parses as a real number => numeric)
// unless overridden. Throws IoError / DataError.
Relation load_csv(const std::string& path, const SchemaHints& hints = {});
Relation read_csv(std::istream& in, std::string relation_name,
                  const SchemaHints& hints = {});

// Writes the relation back in the format load_csv accepts. Numeric values
// are printed with enough digits to round-trip exactly.
void write_csv(const Relation& relation, std::ostream& out);
void save_csv(const Relation& relation, const std::string& path);

// ---------------------------------------------------------------------------
// Base predicates: conjunctions of "attribute op constant".

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view to_string(CompareOp op);

struct Comparison {
  // Relation alias as written in the query; empty once validated.
  std::string qualifier;
  std::string attribute;
  CompareOp op = CompareOp::kEq;
  Value value;

  bool operator==(const Comparison&) const = default;
};

// An empty conjunction is the always-true predicate.
struct BasePredicate {
  std::vector<Comparison> conjuncts;

  bool operator==(const BasePredicate&) const = default;
};

// Resolves every attribute of the predicate against the schema and checks
// kinds (ordering comparisons and numeric literals need numeric attributes,
// string literals need categorical ones with = or <>).
void check_base_predicate(const BasePredicate& predicate, const Schema& schema);

// Evaluates the predicate on one tuple. The predicate must have passed
// check_base_predicate for the relation's schema.
bool satisfies(const Relation& relation, TupleId id,
               const BasePredicate& predicate);

// Ids of all tuples satisfying the predicate, in increasing order.
std::vector<TupleId> apply_base_predicate(const Relation& relation,
                                          const BasePredicate& predicate);

struct AttributeStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Exact min/max and compensated mean for each listed numeric attribute.
// Throws ValidationError for categorical or unknown attributes and for an
// empty relation.
std::vector<AttributeStats> attribute_stats(
    const Relation& relation, std::span<const std::string> attributes);

}  // namespace paql

#endif  // PAQL_RELATION_HPP_
