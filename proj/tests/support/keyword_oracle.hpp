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

#ifndef LEGOFORGE_TESTS_SUPPORT_KEYWORD_ORACLE_HPP_
#define LEGOFORGE_TESTS_SUPPORT_KEYWORD_ORACLE_HPP_

#include <array>
#include <string>
#include <string_view>

namespace legoforge::testing {

// Replaces the body of every string literal, quoted identifier and comment
// with spaces. Output has the same length as the input.
std::string BlankLiterals(std::string_view sql);

// Keyword class counts by regular expression over sanitized text, in the
// order WHERE, logic, aggregate, scalar, JOIN, grouping, ordering, set-op.
std::array<int, 8> RegexCounts(std::string_view sql);

// Weighted keyword sum using a weight table written out independently of
// the library defaults.
double OracleKeywordTerm(const std::array<int, 8>& counts);

double OracleTotal(std::string_view sql, bool nested, double db_size,
                   double max_size);

}  // namespace legoforge::testing

#endif  // LEGOFORGE_TESTS_SUPPORT_KEYWORD_ORACLE_HPP_
