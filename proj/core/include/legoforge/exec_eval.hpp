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

#ifndef LEGOFORGE_EXEC_EVAL_HPP_
#define LEGOFORGE_EXEC_EVAL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "legoforge/dataset.hpp"

namespace legoforge::eval {

struct Blob {
  std::vector<unsigned char> bytes;
  friend bool operator==(const Blob&, const Blob&) = default;
};

// SQLite storage classes: NULL, INTEGER, REAL, TEXT, BLOB.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string,
                          Blob>;
using Row = std::vector<Cell>;

enum class ErrorKind { kSyntax, kRuntime, kTimeout };
std::string_view ErrorKindName(ErrorKind kind);

struct ExecOutcome {
  // Rows in the order the engine produced them; populated iff !error_kind.
  std::vector<Row> rows;
  std::optional<ErrorKind> error_kind;
  std::string error_message;
  double elapsed_ms = 0.0;

  bool ok() const { return !error_kind.has_value(); }

  static ExecOutcome FromRows(std::vector<Row> rows);
  static ExecOutcome FromError(ErrorKind kind, std::string message = {});
};

inline constexpr int kDefaultTimeoutMs = 30000;

// Runs the first statement of `sql` on a read-only connection. Query
// failures come back as ExecOutcome errors; a missing or corrupt database
// throws Error(kDbUnreadable).
ExecOutcome ExecuteQuery(const std::filesystem::path& db_path,
                         std::string_view sql,
                         int timeout_ms = kDefaultTimeoutMs);

// Match predicate: both sides must have rows; rows are compared as
// multisets, or as sequences when the gold query has a top-level ORDER BY.
// Integers and reals are unified and compared with a 1e-6 relative
// tolerance. Column names never matter.
bool CompareResults(const ExecOutcome& gold, const ExecOutcome& pred,
                    bool gold_has_order_by);

inline constexpr double kNumericRelTolerance = 1e-6;
bool CellsEqual(const Cell& a, const Cell& b);

struct EvalPair {
  std::string id;
  std::string db_id;
  std::string gold_sql;
  // nullopt when no prediction was supplied for this id.
  std::optional<std::string> pred_sql;
  Tier tier = Tier::kEasy;
};

struct PairVerdict {
  std::string id;
  Tier tier = Tier::kEasy;
  bool matched = false;
  std::string reason;  // empty when matched
};

struct TierAccuracy {
  std::size_t n = 0;
  std::size_t matches = 0;
  double accuracy = 0.0;  // percentage; 0 when n == 0
};

struct EXReport {
  std::size_t n = 0;
  std::size_t matches = 0;
  double overall_accuracy = 0.0;
  // Set when the pair list was empty and the accuracy is a placeholder 0.
  bool empty_warning = false;
  std::array<TierAccuracy, 4> per_tier{};
  std::vector<PairVerdict> per_pair;

  nlohmann::ordered_json ToJson() const;
};

struct EvalOptions {
  int timeout_ms = kDefaultTimeoutMs;
  int workers = 1;
};

// <db_root>/<db_id>/<db_id>.sqlite
std::filesystem::path DatabasePath(const std::filesystem::path& db_root,
                                   std::string_view db_id);

// Executes every pair and scores it. Verdicts follow input order regardless
// of the number of workers.
EXReport ExecutionAccuracy(std::span<const EvalPair> pairs,
                           const std::filesystem::path& db_root,
                           const EvalOptions& options = {});

// Rows are reports (labelled), columns EASY..EXTRA, cells per-tier
// accuracy. Throws Error(kInconsistentPairSets) if the reports were not
// computed over the same pairs.
std::string TierMatrixCsv(
    std::span<const std::pair<std::string, EXReport>> reports);

// JSON Lines of {id, pred_sql}. Throws Error(kMissingFile) or
// Error(kMalformedRecord).
std::map<std::string, std::string> ReadPredictions(
    const std::filesystem::path& path);

// One pair per gold record, in gold order.
std::vector<EvalPair> JoinPredictions(
    std::span<const SbclRecord> gold,
    const std::map<std::string, std::string>& predictions);

}  // namespace legoforge::eval

#endif  // LEGOFORGE_EXEC_EVAL_HPP_
