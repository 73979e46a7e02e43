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

#ifndef LEGOFORGE_COMPLEXITY_HPP_
#define LEGOFORGE_COMPLEXITY_HPP_

#include <cstdint>

#include <nlohmann/json.hpp>

#include "legoforge/sql_analyzer.hpp"

namespace legoforge {

// Per-class weights for the keyword term, plus the fixed nesting charge.
// Default construction yields the published table.
struct ComplexityWeights {
  double where = 0.5;
  double logic = 0.1;    // AND / OR / NOR
  double agg = 0.15;     // MAX / MIN / AVG / SUM
  double scalar = 0.15;  // COUNT / CAST / DISTINCT
  double join = 1.5;
  double group = 0.75;   // GROUP BY / HAVING
  double order = 0.5;    // ORDER BY / LIMIT
  double setop = 2.0;    // UNION / INTERSECT / EXCEPT
  double nested_weight = 2.0;

  // Throws Error(kInvalidArgument) if any weight is negative or non-finite.
  void Validate() const;

  friend bool operator==(const ComplexityWeights&,
                         const ComplexityWeights&) = default;
};

ComplexityWeights DefaultWeights();

// Normalization for the database-size term. `max_size` is the largest
// database size (in characters, or bytes in file-bytes mode) over the
// corpus being scored.
class ScoringContext {
 public:
  // Throws Error(kInvalidArgument) when max_size < 1.
  explicit ScoringContext(std::int64_t max_size);

  std::int64_t max_size() const { return max_size_; }

 private:
  std::int64_t max_size_;
};

struct ComplexityScore {
  double keyword_term = 0.0;
  double db_term = 0.0;
  double nested_term = 0.0;
  double total = 0.0;

  friend bool operator==(const ComplexityScore&,
                         const ComplexityScore&) = default;
};

// db_size * 2 / max_size. Throws Error(kSizeExceedsMax) if db_size exceeds
// the context maximum and Error(kInvalidArgument) if it is negative.
double DbScore(std::int64_t db_size, const ScoringContext& ctx);

// Like DbScore but saturates at 2 instead of throwing. Used when scoring an
// evaluation split under the training corpus' context.
double DbScoreClamped(std::int64_t db_size, const ScoringContext& ctx);

// Weighted keyword sum, accumulated in table row order.
double KeywordTerm(const sql::KeywordCounts& counts,
                   const ComplexityWeights& weights);

ComplexityScore ScoreComplexity(const sql::QueryShape& shape,
                                std::int64_t db_size,
                                const ScoringContext& ctx,
                                const ComplexityWeights& weights = {});

ComplexityScore ScoreComplexityClamped(const sql::QueryShape& shape,
                                       std::int64_t db_size,
                                       const ScoringContext& ctx,
                                       const ComplexityWeights& weights = {});

nlohmann::json ToJson(const ComplexityWeights& weights);

}  // namespace legoforge

#endif  // LEGOFORGE_COMPLEXITY_HPP_
