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

#include "paql/relation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "paql/error.hpp"

namespace paql {

Schema::Schema(std::string name, std::vector<Attribute> attributes)
    : name_(std::move(name)), attributes_(std::move(attributes)) {
  if (attributes_.empty()) {
    throw ValidationError("schema '" + name_ + "' has no attributes");
  }
  std::set<std::string_view> seen;
  for (const Attribute& a : attributes_) {
    if (a.name.empty()) {
      throw ValidationError("schema '" + name_ + "' has an unnamed attribute");
    }
    if (!seen.insert(a.name).second) {
      throw ValidationError("duplicate attribute '" + a.name + "'");
    }
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view attribute) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == attribute) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require(std::string_view attribute) const {
  if (auto index = index_of(attribute)) return *index;
  throw ValidationError("unknown attribute '" + std::string(attribute) +
                        "' in relation '" + name_ + "'");
}

Relation::Relation(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.arity()) {
    throw DataError("relation '" + schema_.name() + "': expected " +
                    std::to_string(schema_.arity()) + " columns, got " +
                    std::to_string(columns_.size()));
  }
  for (std::size_t a = 0; a < columns_.size(); ++a) {
    const bool numeric = schema_.attribute(a).kind == AttributeKind::kNumeric;
    const std::size_t len =
        numeric ? columns_[a].numbers.size() : columns_[a].labels.size();
    if (a == 0) size_ = len;
    if (len != size_) {
      throw DataError("relation '" + schema_.name() + "': column '" +
                      schema_.attribute(a).name + "' has " +
                      std::to_string(len) + " values, expected " +
                      std::to_string(size_));
    }
    if (numeric) {
      columns_[a].labels.clear();
      for (double v : columns_[a].numbers) {
        if (!std::isfinite(v)) {
          throw DataError("non-finite value in numeric column '" +
                          schema_.attribute(a).name + "'");
        }
      }
    } else {
      columns_[a].numbers.clear();
    }
  }
}

Tuple Relation::tuple(TupleId id) const {
  Tuple t;
  t.id = id;
  t.values.reserve(columns_.size());
  for (std::size_t a = 0; a < columns_.size(); ++a) {
    if (schema_.attribute(a).kind == AttributeKind::kNumeric) {
      t.values.emplace_back(columns_[a].numbers[id]);
    } else {
      t.values.emplace_back(columns_[a].labels[id]);
    }
  }
  return t;
}

Relation Relation::select(std::span<const TupleId> ids) const {
  std::vector<Column> columns(columns_.size());
  for (std::size_t a = 0; a < columns_.size(); ++a) {
    if (schema_.attribute(a).kind == AttributeKind::kNumeric) {
      columns[a].numbers.reserve(ids.size());
      for (TupleId id : ids) columns[a].numbers.push_back(numeric(a, id));
    } else {
      columns[a].labels.reserve(ids.size());
      for (TupleId id : ids) columns[a].labels.push_back(categorical(a, id));
    }
  }
  return Relation(schema_, std::move(columns));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw DataError("unterminated quote on line " + std::to_string(line_no));
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos ||
         (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                         std::isspace(static_cast<unsigned char>(s.back()))));
}

}  // namespace

Relation read_csv(std::istream& in, std::string relation_name,
                  const SchemaHints& hints) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw DataError("missing CSV header");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  std::vector<std::string> header = split_csv_line(line, line_no);
  for (std::string& h : header) h = trim(h);
  {
    std::set<std::string_view> seen;
    for (const std::string& h : header) {
      if (h.empty()) throw DataError("empty column name in CSV header");
      if (!seen.insert(h).second) {
        throw DataError("duplicate column '" + h + "' in CSV header");
      }
    }
  }
  for (const auto& [name, kind] : hints) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw DataError("schema hint for unknown column '" + name + "'");
    }
  }

  std::vector<std::vector<std::string>> cells(header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw DataError("ragged row on line " + std::to_string(line_no) +
                      ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      cells[c].push_back(std::move(fields[c]));
    }
  }

  std::vector<Attribute> attributes;
  std::vector<Column> columns(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    AttributeKind kind = AttributeKind::kNumeric;
    if (auto hint = hints.find(header[c]); hint != hints.end()) {
      kind = hint->second;
    } else {
      for (const std::string& cell : cells[c]) {
        const std::string t = trim(cell);
        if (!t.empty() && !parse_number(t)) {
          kind = AttributeKind::kCategorical;
          break;
        }
      }
    }
    attributes.push_back({header[c], kind});
    if (kind == AttributeKind::kNumeric) {
      columns[c].numbers.reserve(cells[c].size());
      for (std::size_t r = 0; r < cells[c].size(); ++r) {
        const std::string t = trim(cells[c][r]);
        const auto value = parse_number(t);
        const std::string where = "column '" + header[c] + "', row " +
                                  std::to_string(r + 2);
        if (t.empty()) throw DataError("empty numeric cell in " + where);
        if (!value) throw DataError("non-numeric cell '" + t + "' in " + where);
        if (!std::isfinite(*value)) {
          throw DataError("non-finite value '" + t + "' in " + where);
        }
        columns[c].numbers.push_back(*value);
      }
    } else {
      columns[c].labels = std::move(cells[c]);
    }
  }
  return Relation(Schema(std::move(relation_name), std::move(attributes)),
                  std::move(columns));
}

Relation load_csv(const std::string& path, const SchemaHints& hints) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  Relation relation =
      read_csv(in, std::filesystem::path(path).stem().string(), hints);
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return relation;
}

void write_csv(const Relation& relation, std::ostream& out) {
  const Schema& schema = relation.schema();
  auto put_label = [&out](const std::string& s) {
    if (needs_quoting(s)) {
      out << '"';
      for (char c : s) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    } else {
      out << s;
    }
  };
  for (std::size_t a = 0; a < schema.arity(); ++a) {
    if (a) out << ',';
    put_label(schema.attribute(a).name);
  }
  out << '\n';
  char buffer[64];
  for (TupleId id = 0; id < relation.size(); ++id) {
    for (std::size_t a = 0; a < schema.arity(); ++a) {
      if (a) out << ',';
      if (schema.attribute(a).kind == AttributeKind::kNumeric) {
        const auto [end, ec] =
            std::to_chars(buffer, buffer + sizeof(buffer),
                          relation.numeric(a, id));
        out.write(buffer, end - buffer);
      } else {
        put_label(relation.categorical(a, id));
      }
    }
    out << '\n';
  }
}

void save_csv(const Relation& relation, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(relation, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Base predicates

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "=";
    case CompareOp::kNe: return "<>";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
  }
  return "?";
}

void check_base_predicate(const BasePredicate& predicate,
                          const Schema& schema) {
  for (const Comparison& c : predicate.conjuncts) {
    const std::size_t index = schema.require(c.attribute);
    const bool numeric_attr =
        schema.attribute(index).kind == AttributeKind::kNumeric;
    const bool numeric_literal = std::holds_alternative<double>(c.value);
    if (numeric_attr != numeric_literal) {
      throw ValidationError(
          "type mismatch: attribute '" + c.attribute + "' is " +
          (numeric_attr ? "numeric" : "categorical") + " but compared to a " +
          (numeric_literal ? "number" : "string"));
    }
    if (!numeric_attr && c.op != CompareOp::kEq && c.op != CompareOp::kNe) {
      throw ValidationError("categorical attribute '" + c.attribute +
                            "' supports only = and <>");
    }
  }
}

namespace {

template <typename T>
bool compare(const T& lhs, CompareOp op, const T& rhs) {
  switch (op) {
    case CompareOp::kEq: return lhs == rhs;
    case CompareOp::kNe: return lhs != rhs;
    case CompareOp::kLt: return lhs < rhs;
    case CompareOp::kLe: return lhs <= rhs;
    case CompareOp::kGt: return lhs > rhs;
    case CompareOp::kGe: return lhs >= rhs;
  }
  return false;
}

struct ResolvedComparison {
  std::size_t attribute;
  const Comparison* source;
};

std::vector<ResolvedComparison> resolve(const BasePredicate& predicate,
                                        const Schema& schema) {
  check_base_predicate(predicate, schema);
  std::vector<ResolvedComparison> resolved;
  for (const Comparison& c : predicate.conjuncts) {
    resolved.push_back({schema.require(c.attribute), &c});
  }
  return resolved;
}

bool satisfies_resolved(const Relation& relation, TupleId id,
                        std::span<const ResolvedComparison> resolved) {
  for (const ResolvedComparison& rc : resolved) {
    const Comparison& c = *rc.source;
    if (const double* number = std::get_if<double>(&c.value)) {
      if (!compare(relation.numeric(rc.attribute, id), c.op, *number)) {
        return false;
      }
    } else if (!compare(relation.categorical(rc.attribute, id), c.op,
                        std::get<std::string>(c.value))) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool satisfies(const Relation& relation, TupleId id,
               const BasePredicate& predicate) {
  const auto resolved = resolve(predicate, relation.schema());
  return satisfies_resolved(relation, id, resolved);
}

std::vector<TupleId> apply_base_predicate(const Relation& relation,
                                          const BasePredicate& predicate) {
  const auto resolved = resolve(predicate, relation.schema());
  std::vector<TupleId> ids;
  for (TupleId id = 0; id < relation.size(); ++id) {
    if (satisfies_resolved(relation, id, resolved)) ids.push_back(id);
  }
  return ids;
}

std::vector<AttributeStats> attribute_stats(
    const Relation& relation, std::span<const std::string> attributes) {
  std::vector<std::size_t> indices;
  for (const std::string& name : attributes) {
    const std::size_t index = relation.schema().require(name);
    if (relation.schema().attribute(index).kind != AttributeKind::kNumeric) {
      throw ValidationError("attribute '" + name + "' is not numeric");
    }
    indices.push_back(index);
  }
  if (relation.empty()) {
    throw ValidationError("statistics requested on empty relation '" +
                          relation.name() + "'");
  }
  std::vector<AttributeStats> stats;
  for (std::size_t index : indices) {
    const auto column = relation.numeric_column(index);
    AttributeStats s;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    // Neumaier summation.
    double sum = 0.0;
    double compensation = 0.0;
    for (double v : column) {
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
      const double t = sum + v;
      if (std::abs(sum) >= std::abs(v)) {
        compensation += (sum - t) + v;
      } else {
        compensation += (v - t) + sum;
      }
      sum = t;
    }
    s.mean = (sum + compensation) / static_cast<double>(column.size());
    // The mean of a set lies within its range; clamp rounding excursions.
    s.mean = std::clamp(s.mean, s.min, s.max);
    stats.push_back(s);
  }
  return stats;
}

}  // namespace paql
