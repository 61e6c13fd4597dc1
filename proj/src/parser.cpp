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

// Recursive-descent parser for PaQL.
//
//   query      := SELECT PACKAGE '(' ident {',' ident} ')' [AS] ident
//                 FROM relation {',' relation}
//                 [WHERE conjunction]
//                 [SUCH THAT global {AND global}]
//                 [(MINIMIZE | MAXIMIZE) aggregate] [';']
//   relation   := ident [AS] ident [REPEAT integer]
//   conjunction:= comparison {AND comparison}
//   comparison := attr op literal | literal op attr
//   global     := term op term | term BETWEEN number AND number
//   term       := aggregate [('+'|'-') number] | number
//   aggregate  := COUNT '(' [ident '.'] '*' ')' | (SUM|AVG) '(' attr ')'
//               | '(' SELECT (COUNT '(' '*' ')' | (SUM|AVG) '(' attr ')')
//                     FROM ident [WHERE conjunction] ')'

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "paql/error.hpp"
#include "paql/query.hpp"

namespace paql {
namespace {

enum class TokenKind {
  kIdent,
  kNumber,
  kString,
  kSymbol,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;  // identifier/symbol text, or the unescaped string body
  double number = 0.0;
  bool integral = false;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      skip_space_and_comments();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        tokens.push_back(t);
        return tokens;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = TokenKind::kIdent;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_')) {
          t.text.push_back(advance());
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < text_.size() &&
                  std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        lex_number(t);
      } else if (c == '\'') {
        lex_string(t);
      } else if (c == '"') {
        // Quoted identifier.
        t.kind = TokenKind::kIdent;
        advance();
        while (pos_ < text_.size() && text_[pos_] != '"') {
          t.text.push_back(advance());
        }
        if (pos_ >= text_.size()) {
          throw ParseError("unterminated quoted identifier", t.line, t.column);
        }
        advance();
      } else {
        t.kind = TokenKind::kSymbol;
        static constexpr std::string_view kTwoChar[] = {"<=", ">=", "<>", "!="};
        const std::string_view rest = text_.substr(pos_);
        bool matched = false;
        for (std::string_view sym : kTwoChar) {
          if (rest.starts_with(sym)) {
            t.text = std::string(sym);
            advance();
            advance();
            matched = true;
            break;
          }
        }
        if (!matched) {
          static constexpr std::string_view kOneChar = "(),.*=<>+-/;";
          if (kOneChar.find(c) == std::string_view::npos) {
            throw ParseError(std::string("unexpected character '") + c + "'",
                             t.line, t.column);
          }
          t.text = std::string(1, advance());
        }
      }
      tokens.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    t.kind = TokenKind::kNumber;
    const std::size_t start = pos_;
    bool integral = true;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      advance();
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      integral = false;
      advance();
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
        ++look;
      }
      if (look < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[look]))) {
        integral = false;
        while (pos_ < look) advance();
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          advance();
        }
      }
    }
    t.text = std::string(text_.substr(start, pos_ - start));
    const auto [ptr, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw ParseError("malformed number '" + t.text + "'", t.line, t.column);
    }
    t.integral = integral;
  }

  void lex_string(Token& t) {
    t.kind = TokenKind::kString;
    advance();
    while (true) {
      if (pos_ >= text_.size()) {
        throw ParseError("unterminated string literal", t.line, t.column);
      }
      const char c = advance();
      if (c == '\'') {
        if (pos_ < text_.size() && text_[pos_] == '\'') {
          t.text.push_back(advance());
        } else {
          return;
        }
      } else {
        t.text.push_back(c);
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

// A parsed "term": either an aggregate (plus constant offset) or a constant.
struct Term {
  std::optional<AggregateExpr> aggregate;
  double constant = 0.0;
  Token at;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  PackageQuery parse_query() {
    PackageQuery q;
    expect_keyword("SELECT");
    expect_keyword("PACKAGE");
    expect_symbol("(");
    q.package_sources.push_back(expect_ident("relation alias"));
    while (accept_symbol(",")) {
      q.package_sources.push_back(expect_ident("relation alias"));
    }
    expect_symbol(")");
    accept_keyword("AS");
    q.package_name = expect_ident("package name");

    expect_keyword("FROM");
    const Token from_token = peek();
    q.relation_name = expect_ident("relation name");
    accept_keyword("AS");
    if (peek().kind == TokenKind::kIdent && !is_clause_keyword(peek())) {
      q.relation_alias = next().text;
    } else {
      q.relation_alias = q.relation_name;
    }
    if (accept_keyword("REPEAT")) {
      const Token t = next();
      if (t.kind != TokenKind::kNumber || !t.integral) {
        throw ParseError("REPEAT expects a non-negative integer", t.line,
                         t.column);
      }
      q.repeat = static_cast<std::int64_t>(t.number);
    }
    if (peek_symbol(",")) {
      throw ParseError("unsupported: joins (multiple relations in FROM)",
                       from_token.line, from_token.column);
    }

    if (accept_keyword("WHERE")) {
      q.base_predicate = parse_conjunction();
    }
    if (accept_keyword("SUCH")) {
      expect_keyword("THAT");
      q.global_predicates.push_back(parse_global());
      while (accept_keyword("AND")) {
        q.global_predicates.push_back(parse_global());
      }
    }
    if (peek_keyword("MINIMIZE") || peek_keyword("MAXIMIZE")) {
      Objective objective;
      objective.direction = upper(next().text) == "MINIMIZE"
                                ? Direction::kMinimize
                                : Direction::kMaximize;
      const Token at = peek();
      Term term = parse_term();
      if (!term.aggregate) {
        throw ParseError("objective must be an aggregate", at.line, at.column);
      }
      if (term.constant != 0.0) {
        throw ParseError("unsupported: constant offset in objective", at.line,
                         at.column);
      }
      if (term.aggregate->kind == AggregateKind::kAvg) {
        throw ParseError("unsupported: non-linear expression (AVG objective)",
                         at.line, at.column);
      }
      objective.expr = std::move(*term.aggregate);
      q.objective = std::move(objective);
    }
    accept_symbol(";");
    if (peek().kind != TokenKind::kEnd) {
      fail("unexpected '" + peek().text + "'");
    }
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, peek().line, peek().column);
  }

  static bool is_keyword(const Token& t, std::string_view keyword) {
    return t.kind == TokenKind::kIdent && upper(t.text) == keyword;
  }
  static bool is_clause_keyword(const Token& t) {
    static constexpr std::string_view kClauses[] = {
        "REPEAT", "WHERE", "SUCH", "MINIMIZE", "MAXIMIZE"};
    return std::any_of(std::begin(kClauses), std::end(kClauses),
                       [&](std::string_view k) { return is_keyword(t, k); });
  }
  bool peek_keyword(std::string_view keyword, std::size_t ahead = 0) const {
    return is_keyword(peek(ahead), keyword);
  }
  bool accept_keyword(std::string_view keyword) {
    if (!peek_keyword(keyword)) return false;
    next();
    return true;
  }
  void expect_keyword(std::string_view keyword) {
    if (!accept_keyword(keyword)) {
      fail("expected " + std::string(keyword) + describe_found());
    }
  }
  bool peek_symbol(std::string_view symbol, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::kSymbol && peek(ahead).text == symbol;
  }
  bool accept_symbol(std::string_view symbol) {
    if (!peek_symbol(symbol)) return false;
    next();
    return true;
  }
  void expect_symbol(std::string_view symbol) {
    if (!accept_symbol(symbol)) {
      fail("expected '" + std::string(symbol) + "'" + describe_found());
    }
  }
  std::string expect_ident(std::string_view what) {
    if (peek().kind != TokenKind::kIdent) {
      fail("expected " + std::string(what) + describe_found());
    }
    return next().text;
  }
  std::string describe_found() const {
    if (peek().kind == TokenKind::kEnd) return " but reached end of query";
    return " but found '" + peek().text + "'";
  }

  // [qualifier '.'] name
  std::pair<std::string, std::string> parse_attribute_ref() {
    std::string first = expect_ident("attribute");
    if (accept_symbol(".")) {
      return {std::move(first), expect_ident("attribute")};
    }
    return {std::string(), std::move(first)};
  }

  std::optional<CompareOp> accept_compare_op() {
    if (peek().kind != TokenKind::kSymbol) return std::nullopt;
    const std::string& s = peek().text;
    std::optional<CompareOp> op;
    if (s == "=") op = CompareOp::kEq;
    else if (s == "<>" || s == "!=") op = CompareOp::kNe;
    else if (s == "<") op = CompareOp::kLt;
    else if (s == "<=") op = CompareOp::kLe;
    else if (s == ">") op = CompareOp::kGt;
    else if (s == ">=") op = CompareOp::kGe;
    if (op) next();
    return op;
  }

  static CompareOp mirror(CompareOp op) {
    switch (op) {
      case CompareOp::kLt: return CompareOp::kGt;
      case CompareOp::kLe: return CompareOp::kGe;
      case CompareOp::kGt: return CompareOp::kLt;
      case CompareOp::kGe: return CompareOp::kLe;
      default: return op;
    }
  }

  bool at_literal() const {
    const Token& t = peek();
    if (t.kind == TokenKind::kNumber || t.kind == TokenKind::kString) {
      return true;
    }
    return (peek_symbol("-") || peek_symbol("+")) &&
           peek(1).kind == TokenKind::kNumber;
  }

  Value parse_literal() {
    if (peek().kind == TokenKind::kString) return next().text;
    return parse_signed_number();
  }

  double parse_signed_number() {
    double sign = 1.0;
    if (accept_symbol("-")) {
      sign = -1.0;
    } else {
      accept_symbol("+");
    }
    if (peek().kind != TokenKind::kNumber) fail("expected a number" + describe_found());
    return sign * next().number;
  }

  Comparison parse_comparison() {
    Comparison c;
    if (at_literal()) {
      c.value = parse_literal();
      auto op = accept_compare_op();
      if (!op) fail("expected comparison operator" + describe_found());
      auto [qualifier, name] = parse_attribute_ref();
      c.qualifier = std::move(qualifier);
      c.attribute = std::move(name);
      c.op = mirror(*op);
      return c;
    }
    auto [qualifier, name] = parse_attribute_ref();
    c.qualifier = std::move(qualifier);
    c.attribute = std::move(name);
    auto op = accept_compare_op();
    if (!op) fail("expected comparison operator" + describe_found());
    c.op = *op;
    if (!at_literal()) {
      fail("expected a constant on the right of '" +
           std::string(to_string(c.op)) + "'" + describe_found());
    }
    c.value = parse_literal();
    return c;
  }

  BasePredicate parse_conjunction() {
    BasePredicate p;
    p.conjuncts.push_back(parse_comparison());
    while (true) {
      if (peek_keyword("OR")) fail("unsupported: OR in selection predicate");
      // "AND" inside WHERE continues the conjunction unless the next token
      // starts something that is not a comparison.
      if (!peek_keyword("AND")) break;
      next();
      p.conjuncts.push_back(parse_comparison());
    }
    if (peek_keyword("OR")) fail("unsupported: OR in selection predicate");
    return p;
  }

  AggregateExpr parse_aggregate_call(bool inside_subquery) {
    const Token name = next();
    const std::string keyword = upper(name.text);
    if (keyword == "MIN" || keyword == "MAX") {
      throw ParseError("unsupported: " + keyword + " aggregate", name.line,
                       name.column);
    }
    expect_symbol("(");
    AggregateExpr e;
    if (keyword == "COUNT") {
      e.kind = AggregateKind::kCountStar;
      if (!inside_subquery && peek().kind == TokenKind::kIdent &&
          peek_symbol(".", 1)) {
        e.qualifier = next().text;
        next();
      }
      expect_symbol("*");
    } else if (keyword == "SUM" || keyword == "AVG") {
      e.kind = keyword == "SUM" ? AggregateKind::kSum : AggregateKind::kAvg;
      auto [qualifier, attribute] = parse_attribute_ref();
      e.qualifier = std::move(qualifier);
      e.attribute = std::move(attribute);
    } else {
      throw ParseError("unknown aggregate '" + name.text + "'", name.line,
                       name.column);
    }
    expect_symbol(")");
    return e;
  }

  bool at_aggregate_name() const {
    static constexpr std::string_view kNames[] = {"COUNT", "SUM", "AVG", "MIN",
                                                  "MAX"};
    return peek().kind == TokenKind::kIdent && peek_symbol("(", 1) &&
           std::any_of(std::begin(kNames), std::end(kNames),
                       [&](std::string_view k) { return peek_keyword(k); });
  }

  // '(' SELECT agg FROM package [WHERE conjunction] ')'
  AggregateExpr parse_subquery() {
    expect_symbol("(");
    expect_keyword("SELECT");
    if (!at_aggregate_name()) fail("expected aggregate in subquery" + describe_found());
    AggregateExpr e = parse_aggregate_call(/*inside_subquery=*/true);
    expect_keyword("FROM");
    std::string source = expect_ident("package name");
    if (e.qualifier.empty()) e.qualifier = source;
    if (accept_keyword("WHERE")) {
      const Token at = peek();
      BasePredicate filter = parse_conjunction();
      if (e.kind != AggregateKind::kCountStar) {
        throw ParseError("unsupported: filtered SUM/AVG subquery", at.line,
                         at.column);
      }
      for (Comparison& c : filter.conjuncts) {
        if (c.qualifier == source) c.qualifier.clear();
      }
      e.kind = AggregateKind::kFilteredCount;
      e.filter = std::move(filter);
      e.qualifier = source;
    }
    expect_symbol(")");
    return e;
  }

  AggregateExpr parse_aggregate() {
    if (peek_symbol("(")) return parse_subquery();
    if (!at_aggregate_name()) fail("expected aggregate" + describe_found());
    return parse_aggregate_call(/*inside_subquery=*/false);
  }

  void reject_arithmetic() {
    if (peek_symbol("*") || peek_symbol("/")) {
      fail("unsupported: non-linear expression");
    }
  }

  Term parse_term() {
    Term t;
    t.at = peek();
    if (at_literal()) {
      if (peek().kind == TokenKind::kString) fail("unexpected string literal");
      t.constant = parse_signed_number();
      reject_arithmetic();
      return t;
    }
    t.aggregate = parse_aggregate();
    reject_arithmetic();
    while (peek_symbol("+") || peek_symbol("-")) {
      const double sign = next().text == "-" ? -1.0 : 1.0;
      if (peek().kind != TokenKind::kNumber) {
        fail("unsupported: arithmetic between aggregates");
      }
      t.constant += sign * next().number;
      reject_arithmetic();
    }
    return t;
  }

  GlobalPredicate parse_global() {
    const Token start = peek();
    Term lhs = parse_term();

    if (accept_keyword("BETWEEN")) {
      if (!lhs.aggregate) fail("BETWEEN needs an aggregate on its left");
      GlobalPredicate g;
      g.lhs = std::move(*lhs.aggregate);
      g.offset = lhs.constant;
      g.op = GlobalOp::kBetween;
      g.bound = parse_signed_number();
      expect_keyword("AND");
      g.upper = parse_signed_number();
      if (g.bound > g.upper) {
        throw ParseError("BETWEEN requires lower bound <= upper bound",
                         start.line, start.column);
      }
      return g;
    }

    const Token op_token = peek();
    std::optional<CompareOp> op = accept_compare_op();
    if (!op) fail("expected comparison operator" + describe_found());
    if (*op == CompareOp::kLt || *op == CompareOp::kGt) {
      throw ParseError("unsupported: strict global inequality", op_token.line,
                       op_token.column);
    }
    if (*op == CompareOp::kNe) {
      throw ParseError("unsupported: <> in a global predicate", op_token.line,
                       op_token.column);
    }
    Term rhs = parse_term();

    if (!lhs.aggregate && !rhs.aggregate) {
      throw ParseError("global predicate compares two constants", start.line,
                       start.column);
    }
    if (!lhs.aggregate) {
      std::swap(lhs, rhs);
      op = mirror(*op);
    }
    GlobalPredicate g;
    g.op = *op == CompareOp::kEq   ? GlobalOp::kEq
           : *op == CompareOp::kLe ? GlobalOp::kLe
                                   : GlobalOp::kGe;
    g.lhs = std::move(*lhs.aggregate);
    g.offset = lhs.constant;
    if (rhs.aggregate) {
      auto is_count = [](const AggregateExpr& e) {
        return e.kind == AggregateKind::kCountStar ||
               e.kind == AggregateKind::kFilteredCount;
      };
      if (!is_count(g.lhs) || !is_count(*rhs.aggregate)) {
        throw ParseError(
            "unsupported: only counts may be compared with each other",
            start.line, start.column);
      }
      g.rhs_count = std::move(*rhs.aggregate);
      g.bound = rhs.constant;
    } else {
      g.bound = rhs.constant;
    }
    return g;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

PackageQuery parse(std::string_view text) {
  Parser parser(Lexer(text).run());
  return parser.parse_query();
}

PackageQuery parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace paql
