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

#ifndef LEGOFORGE_SQL_ANALYZER_HPP_
#define LEGOFORGE_SQL_ANALYZER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "legoforge/error.hpp"

namespace legoforge::sql {

enum class TokenKind {
  kKeyword,
  kIdentifier,
  kStringLiteral,
  kNumberLiteral,
  kOperator,
  kPunctuation,
  kComment,
};

std::string_view TokenKindName(TokenKind kind);

struct Token {
  TokenKind kind;
  // Exact source slice, including quotes and comment markers.
  std::string text;
  // 0-based byte offset of the first byte of `text` in the input.
  std::size_t position = 0;

  // Upper-cased text for keywords; empty for every other kind.
  std::string keyword() const;

  friend bool operator==(const Token&, const Token&) = default;
};

// Per-class keyword occurrence counts, one field per row of the weight
// table. Two-word forms (GROUP BY, ORDER BY) count once per pair.
struct KeywordCounts {
  int where_ct = 0;
  int logic_ct = 0;   // AND, OR, NOR
  int agg_ct = 0;     // MAX, MIN, AVG, SUM
  int scalar_ct = 0;  // COUNT, CAST, DISTINCT
  int join_ct = 0;
  int group_ct = 0;   // GROUP BY, HAVING
  int order_ct = 0;   // ORDER BY, LIMIT
  int setop_ct = 0;   // UNION, INTERSECT, EXCEPT

  friend bool operator==(const KeywordCounts&, const KeywordCounts&) = default;
};

struct QueryShape {
  KeywordCounts keyword_counts;
  bool has_nested = false;
  bool parse_ok = true;

  friend bool operator==(const QueryShape&, const QueryShape&) = default;
};

struct NestingResult {
  bool has_nested = false;
  bool parse_ok = true;
};

// Result of lexing without throwing. On a lexing error the tokens still
// cover the whole input (the unterminated tail becomes one token) and
// `error` names the failure.
struct LexResult {
  std::vector<Token> tokens;
  std::optional<ErrorCode> error;
};

// Lexes `sql_text`. Throws Error(kUnterminatedLiteral) or
// Error(kUnterminatedComment) on malformed input.
std::vector<Token> Tokenize(std::string_view sql_text);

// Same as Tokenize but reports lexing errors in the result.
LexResult TokenizeLenient(std::string_view sql_text);

KeywordCounts CountKeywords(const std::vector<Token>& tokens);

// True iff a SELECT sits strictly below the root statement: a predicate
// subquery, a derived table, a scalar subquery, or a CTE body. Branches of a
// top-level set operation (parenthesized or not) are siblings, not nested.
NestingResult DetectNested(std::string_view sql_text);
NestingResult DetectNested(const std::vector<Token>& tokens);

// Tokenize + CountKeywords + DetectNested. Never throws: lexing or
// bracket-balance failures set parse_ok=false and keep recovered counts.
QueryShape Analyze(std::string_view sql_text);

// True when the outermost statement carries an ORDER BY outside every
// parenthesized group.
bool HasTopLevelOrderBy(std::string_view sql_text);

nlohmann::json ToJson(const KeywordCounts& counts);
nlohmann::json ToJson(const QueryShape& shape);

}  // namespace legoforge::sql

#endif  // LEGOFORGE_SQL_ANALYZER_HPP_
