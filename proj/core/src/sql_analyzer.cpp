//
// Copyright 2026 The lego-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "legoforge/sql_analyzer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <unordered_set>

namespace legoforge::sql {
namespace {

const std::unordered_set<std::string>& KeywordSet() {
  static const std::unordered_set<std::string> kKeywords = {
      "ADD",       "ALL",        "ALTER",     "AND",       "AS",
      "ASC",       "AVG",        "BETWEEN",   "BY",        "CASE",
      "CAST",      "CHECK",      "COLLATE",   "CONSTRAINT", "COUNT",
      "CREATE",    "CROSS",      "CURRENT_DATE", "CURRENT_TIME",
      "CURRENT_TIMESTAMP",       "DEFAULT",   "DELETE",    "DESC",
      "DISTINCT",  "DROP",       "ELSE",      "END",       "ESCAPE",
      "EXCEPT",    "EXISTS",     "FILTER",    "FOREIGN",   "FROM",
      "FULL",      "GLOB",       "GROUP",     "HAVING",    "IF",
      "IN",        "INDEX",      "INNER",     "INSERT",    "INTERSECT",
      "INTO",      "IS",         "ISNULL",    "JOIN",      "KEY",
      "LEFT",      "LIKE",       "LIMIT",     "MATCH",     "MAX",
      "MIN",       "NATURAL",    "NOR",       "NOT",       "NOTNULL",
      "NULL",      "NULLS",      "OFFSET",    "ON",        "OR",
      "ORDER",     "OUTER",      "OVER",      "PARTITION", "PRIMARY",
      "RECURSIVE", "REFERENCES", "REGEXP",    "REPLACE",   "RIGHT",
      "ROWS",      "SELECT",     "SET",       "SUM",       "TABLE",
      "THEN",      "UNION",      "UNIQUE",    "UPDATE",    "USING",
      "VALUES",    "VIEW",       "WHEN",      "WHERE",     "WINDOW",
      "WITH",
  };
  return kKeywords;
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsWordStart(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool IsWordChar(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

bool IsDigit(unsigned char c) { return c >= '0' && c <= '9'; }

std::string Upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view input) : in_(input) {}

  LexResult Run() {
    LexResult result;
    while (pos_ < in_.size()) {
      const auto c = static_cast<unsigned char>(in_[pos_]);
      if (IsSpace(c)) {
        ++pos_;
        continue;
      }
      const std::size_t start = pos_;
      if (c == '-' && Peek(1) == '-') {
        while (pos_ < in_.size() && in_[pos_] != '\n') ++pos_;
        Emit(result, TokenKind::kComment, start);
      } else if (c == '/' && Peek(1) == '*') {
        const auto close = in_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) {
          pos_ = in_.size();
          Emit(result, TokenKind::kComment, start);
          SetError(result, ErrorCode::kUnterminatedComment);
        } else {
          pos_ = close + 2;
          Emit(result, TokenKind::kComment, start);
        }
      } else if (c == '\'') {
        LexQuoted(result, '\'', '\'', TokenKind::kStringLiteral);
      } else if (c == '"') {
        LexQuoted(result, '"', '"', TokenKind::kIdentifier);
      } else if (c == '`') {
        LexQuoted(result, '`', '`', TokenKind::kIdentifier);
      } else if (c == '[') {
        LexQuoted(result, '[', ']', TokenKind::kIdentifier);
      } else if (IsDigit(c) ||
                 (c == '.' && IsDigit(Peek(1)) && !FollowsOperand(result))) {
        LexNumber();
        Emit(result, TokenKind::kNumberLiteral, start);
      } else if (IsWordStart(c)) {
        while (pos_ < in_.size() &&
               IsWordChar(static_cast<unsigned char>(in_[pos_]))) {
          ++pos_;
        }
        const bool qualified = !result.tokens.empty() &&
                               LastSignificant(result) != nullptr &&
                               LastSignificant(result)->text == ".";
        const bool keyword =
            !qualified &&
            KeywordSet().contains(Upper(in_.substr(start, pos_ - start)));
        Emit(result, keyword ? TokenKind::kKeyword : TokenKind::kIdentifier,
             start);
      } else if (c == '(' || c == ')' || c == ',' || c == ';' || c == '.' ||
                 c == '{' || c == '}' || c == ']') {
        ++pos_;
        Emit(result, TokenKind::kPunctuation, start);
      } else {
        LexOperator();
        Emit(result, TokenKind::kOperator, start);
      }
    }
    return result;
  }

 private:
  unsigned char Peek(std::size_t ahead) const {
    return pos_ + ahead < in_.size()
               ? static_cast<unsigned char>(in_[pos_ + ahead])
               : '\0';
  }

  static const Token* LastSignificant(const LexResult& r) {
    for (auto it = r.tokens.rbegin(); it != r.tokens.rend(); ++it) {
      if (it->kind != TokenKind::kComment) return &*it;
    }
    return nullptr;
  }

  // A leading '.' is a decimal point only where an operand may start.
  static bool FollowsOperand(const LexResult& r) {
    const Token* last = LastSignificant(r);
    if (last == nullptr) return false;
    switch (last->kind) {
      case TokenKind::kIdentifier:
      case TokenKind::kNumberLiteral:
      case TokenKind::kStringLiteral:
        return true;
      case TokenKind::kPunctuation:
        return last->text == ")" || last->text == "]";
      default:
        return false;
    }
  }

  void Emit(LexResult& r, TokenKind kind, std::size_t start) {
    r.tokens.push_back(
        Token{kind, std::string(in_.substr(start, pos_ - start)), start});
  }

  static void SetError(LexResult& r, ErrorCode code) {
    if (!r.error) r.error = code;
  }

  // Quote characters are escaped by doubling them, except for [...] which
  // has no escape.
  void LexQuoted(LexResult& r, char open, char close, TokenKind kind) {
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < in_.size()) {
      if (in_[pos_] == close) {
        if (open == close && Peek(1) == static_cast<unsigned char>(close)) {
          pos_ += 2;
          continue;
        }
        ++pos_;
        Emit(r, kind, start);
        return;
      }
      ++pos_;
    }
    Emit(r, kind, start);
    SetError(r, ErrorCode::kUnterminatedLiteral);
  }

  void LexNumber() {
    if (in_[pos_] == '0' && (Peek(1) == 'x' || Peek(1) == 'X') &&
        std::isxdigit(Peek(2))) {
      pos_ += 2;
      while (pos_ < in_.size() &&
             std::isxdigit(static_cast<unsigned char>(in_[pos_]))) {
        ++pos_;
      }
      return;
    }
    while (pos_ < in_.size() && IsDigit(in_[pos_])) ++pos_;
    if (pos_ < in_.size() && in_[pos_] == '.') {
      ++pos_;
      while (pos_ < in_.size() && IsDigit(in_[pos_])) ++pos_;
    }
    if (pos_ < in_.size() && (in_[pos_] == 'e' || in_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < in_.size() && (in_[look] == '+' || in_[look] == '-')) ++look;
      if (look < in_.size() && IsDigit(in_[look])) {
        pos_ = look;
        while (pos_ < in_.size() && IsDigit(in_[pos_])) ++pos_;
      }
    }
  }

  void LexOperator() {
    static constexpr std::array<std::string_view, 8> kTwoChar = {
        "<=", ">=", "<>", "!=", "==", "||", "<<", ">>"};
    const std::string_view rest = in_.substr(pos_);
    for (auto op : kTwoChar) {
      if (rest.starts_with(op)) {
        pos_ += 2;
        return;
      }
    }
    ++pos_;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

bool IsKeyword(const Token& t, std::string_view upper) {
  if (t.kind != TokenKind::kKeyword || t.text.size() != upper.size()) {
    return false;
  }
  for (std::size_t i = 0; i < upper.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != upper[i]) {
      return false;
    }
  }
  return true;
}

bool IsPunct(const Token& t, char c) {
  return t.kind == TokenKind::kPunctuation && t.text.size() == 1 &&
         t.text[0] == c;
}

std::vector<const Token*> Significant(const std::vector<Token>& tokens) {
  std::vector<const Token*> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.kind != TokenKind::kComment) out.push_back(&t);
  }
  return out;
}

}  // namespace

std::string_view TokenKindName(TokenKind kind) {
  switch (kind) {
    case TokenKind::kKeyword: return "Keyword";
    case TokenKind::kIdentifier: return "Identifier";
    case TokenKind::kStringLiteral: return "StringLiteral";
    case TokenKind::kNumberLiteral: return "NumberLiteral";
    case TokenKind::kOperator: return "Operator";
    case TokenKind::kPunctuation: return "Punctuation";
    case TokenKind::kComment: return "Comment";
  }
  return "Unknown";
}

std::string Token::keyword() const {
  return kind == TokenKind::kKeyword ? Upper(text) : std::string();
}

LexResult TokenizeLenient(std::string_view sql_text) {
  return Lexer(sql_text).Run();
}

std::vector<Token> Tokenize(std::string_view sql_text) {
  LexResult r = TokenizeLenient(sql_text);
  if (r.error) {
    const Token& tail = r.tokens.back();
    throw Error(*r.error,
                "starting at offset " + std::to_string(tail.position));
  }
  return std::move(r.tokens);
}

KeywordCounts CountKeywords(const std::vector<Token>& tokens) {
  KeywordCounts c;
  const auto sig = Significant(tokens);
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const Token& t = *sig[i];
    if (t.kind != TokenKind::kKeyword) continue;
    const std::string kw = Upper(t.text);
    const bool next_is_by = i + 1 < sig.size() && IsKeyword(*sig[i + 1], "BY");
    if (kw == "WHERE") {
      ++c.where_ct;
    } else if (kw == "AND" || kw == "OR" || kw == "NOR") {
      ++c.logic_ct;
    } else if (kw == "MAX" || kw == "MIN" || kw == "AVG" || kw == "SUM") {
      ++c.agg_ct;
    } else if (kw == "COUNT" || kw == "CAST" || kw == "DISTINCT") {
      ++c.scalar_ct;
    } else if (kw == "JOIN") {
      ++c.join_ct;
    } else if (kw == "HAVING" || (kw == "GROUP" && next_is_by)) {
      ++c.group_ct;
    } else if (kw == "LIMIT" || (kw == "ORDER" && next_is_by)) {
      ++c.order_ct;
    } else if (kw == "UNION" || kw == "INTERSECT" || kw == "EXCEPT") {
      ++c.setop_ct;
    }
  }
  return c;
}

NestingResult DetectNested(const std::vector<Token>& tokens) {
  enum class Prev { kStart, kSetOp, kOpenBranch, kOther };

  // Each open parenthesis records whether it opens a set-operation branch of
  // the outermost statement.
  std::vector<bool> group_is_branch;
  int non_branch_depth = 0;
  Prev prev = Prev::kStart;
  bool nested = false;

  for (const Token* tp : Significant(tokens)) {
    const Token& t = *tp;
    if (IsPunct(t, '(')) {
      const bool branch = non_branch_depth == 0 &&
                          (prev == Prev::kStart || prev == Prev::kSetOp ||
                           prev == Prev::kOpenBranch);
      group_is_branch.push_back(branch);
      if (!branch) ++non_branch_depth;
      prev = branch ? Prev::kOpenBranch : Prev::kOther;
    } else if (IsPunct(t, ')')) {
      if (group_is_branch.empty()) return {false, false};
      if (!group_is_branch.back()) --non_branch_depth;
      group_is_branch.pop_back();
      prev = Prev::kOther;
    } else if (IsPunct(t, ';') && group_is_branch.empty()) {
      prev = Prev::kStart;
    } else if (IsKeyword(t, "SELECT")) {
      if (non_branch_depth > 0) nested = true;
      prev = Prev::kOther;
    } else if (IsKeyword(t, "UNION") || IsKeyword(t, "INTERSECT") ||
               IsKeyword(t, "EXCEPT")) {
      prev = Prev::kSetOp;
    } else if (prev == Prev::kSetOp &&
               (IsKeyword(t, "ALL") || IsKeyword(t, "DISTINCT"))) {
      // UNION ALL ( ... ) still opens a branch.
    } else {
      prev = Prev::kOther;
    }
  }
  if (!group_is_branch.empty()) return {false, false};
  return {nested, true};
}

NestingResult DetectNested(std::string_view sql_text) {
  LexResult r = TokenizeLenient(sql_text);
  if (r.error) return {false, false};
  return DetectNested(r.tokens);
}

QueryShape Analyze(std::string_view sql_text) {
  LexResult r = TokenizeLenient(sql_text);
  QueryShape shape;
  shape.keyword_counts = CountKeywords(r.tokens);
  if (r.error) {
    shape.parse_ok = false;
    shape.has_nested = false;
    return shape;
  }
  const NestingResult n = DetectNested(r.tokens);
  shape.has_nested = n.has_nested;
  shape.parse_ok = n.parse_ok;
  return shape;
}

bool HasTopLevelOrderBy(std::string_view sql_text) {
  const LexResult r = TokenizeLenient(sql_text);
  const auto sig = Significant(r.tokens);
  int depth = 0;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const Token& t = *sig[i];
    if (IsPunct(t, '(')) {
      ++depth;
    } else if (IsPunct(t, ')')) {
      depth = std::max(0, depth - 1);
    } else if (depth == 0 && IsKeyword(t, "ORDER") && i + 1 < sig.size() &&
               IsKeyword(*sig[i + 1], "BY")) {
      return true;
    }
  }
  return false;
}

nlohmann::json ToJson(const KeywordCounts& c) {
  return nlohmann::json{
      {"where_ct", c.where_ct},   {"logic_ct", c.logic_ct},
      {"agg_ct", c.agg_ct},       {"scalar_ct", c.scalar_ct},
      {"join_ct", c.join_ct},     {"group_ct", c.group_ct},
      {"order_ct", c.order_ct},   {"setop_ct", c.setop_ct},
  };
}

nlohmann::json ToJson(const QueryShape& shape) {
  return nlohmann::json{
      {"keyword_counts", ToJson(shape.keyword_counts)},
      {"has_nested", shape.has_nested},
      {"parse_ok", shape.parse_ok},
  };
}

}  // namespace legoforge::sql
