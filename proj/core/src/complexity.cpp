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

#include "legoforge/complexity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "legoforge/error.hpp"

namespace legoforge {
namespace {

ComplexityScore Assemble(const sql::QueryShape& shape, double db_term,
                         const ComplexityWeights& weights) {
  ComplexityScore s;
  s.keyword_term = KeywordTerm(shape.keyword_counts, weights);
  s.db_term = db_term;
  s.nested_term = shape.has_nested ? weights.nested_weight : 0.0;
  s.total = s.keyword_term + s.db_term + s.nested_term;
  return s;
}

}  // namespace

void ComplexityWeights::Validate() const {
  const std::array<double, 9> all = {where, logic, agg,   scalar,       join,
                                     group, order, setop, nested_weight};
  for (double w : all) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "complexity weights must be finite and non-negative");
    }
  }
}

ComplexityWeights DefaultWeights() { return ComplexityWeights{}; }

ScoringContext::ScoringContext(std::int64_t max_size) : max_size_(max_size) {
  if (max_size < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_size must be >= 1, got " + std::to_string(max_size));
  }
}

double DbScore(std::int64_t db_size, const ScoringContext& ctx) {
  if (db_size < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative db_size");
  }
  if (db_size > ctx.max_size()) {
    throw Error(ErrorCode::kSizeExceedsMax,
                "db_size " + std::to_string(db_size) + " > max_size " +
                    std::to_string(ctx.max_size()));
  }
  return static_cast<double>(db_size) * 2.0 /
         static_cast<double>(ctx.max_size());
}

double DbScoreClamped(std::int64_t db_size, const ScoringContext& ctx) {
  return DbScore(std::min(db_size, ctx.max_size()), ctx);
}

double KeywordTerm(const sql::KeywordCounts& c, const ComplexityWeights& w) {
  double sum = 0.0;
  sum += c.where_ct * w.where;
  sum += c.logic_ct * w.logic;
  sum += c.agg_ct * w.agg;
  sum += c.scalar_ct * w.scalar;
  sum += c.join_ct * w.join;
  sum += c.group_ct * w.group;
  sum += c.order_ct * w.order;
  sum += c.setop_ct * w.setop;
  return sum;
}

ComplexityScore ScoreComplexity(const sql::QueryShape& shape,
                                std::int64_t db_size,
                                const ScoringContext& ctx,
                                const ComplexityWeights& weights) {
  return Assemble(shape, DbScore(db_size, ctx), weights);
}

ComplexityScore ScoreComplexityClamped(const sql::QueryShape& shape,
                                       std::int64_t db_size,
                                       const ScoringContext& ctx,
                                       const ComplexityWeights& weights) {
  return Assemble(shape, DbScoreClamped(db_size, ctx), weights);
}

nlohmann::json ToJson(const ComplexityWeights& w) {
  return nlohmann::json{
      {"where", w.where},   {"logic", w.logic}, {"agg", w.agg},
      {"scalar", w.scalar}, {"join", w.join},   {"group", w.group},
      {"order", w.order},   {"setop", w.setop}, {"nested", w.nested_weight},
  };
}

}  // namespace legoforge
