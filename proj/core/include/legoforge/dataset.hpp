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

#ifndef LEGOFORGE_DATASET_HPP_
#define LEGOFORGE_DATASET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "legoforge/complexity.hpp"

namespace legoforge {

enum class Source { kSpider, kBird };
enum class Split { kTrain, kDev };
enum class Tier { kEasy = 0, kMedium = 1, kHard = 2, kExtra = 3 };
enum class DbSizeMode { kDdl, kFileBytes };

inline constexpr std::array<Tier, 4> kAllTiers = {Tier::kEasy, Tier::kMedium,
                                                  Tier::kHard, Tier::kExtra};

std::string_view SourceName(Source s);  // "SPIDER" / "BIRD"
std::string_view SplitName(Split s);    // "train" / "dev"
std::string_view TierName(Tier t);      // "EASY" ... "EXTRA"
Source ParseSource(std::string_view name);
Split ParseSplit(std::string_view name);
Tier ParseTier(std::string_view name);
DbSizeMode ParseDbSizeMode(std::string_view name);  // "ddl" / "file-bytes"

struct Column {
  std::string name;
  std::string type;
};

struct Table {
  std::string name;
  std::vector<Column> columns;
};

struct ForeignKey {
  std::string from_table;
  std::string from_column;
  std::string to_table;
  std::string to_column;
};

struct DatabaseSchema {
  std::string db_id;
  Source source = Source::kSpider;
  std::vector<Table> tables;
  std::vector<ForeignKey> foreign_keys;
  std::int64_t ddl_char_count = 0;
  std::optional<std::int64_t> file_byte_size;
};

// Canonical DDL used to size a schema: one
// `CREATE TABLE name (col type, ..., FOREIGN KEY (c) REFERENCES t (c));`
// per table, joined by single newlines.
std::string CanonicalDdl(const DatabaseSchema& schema);

// Number of Unicode code points in a UTF-8 string.
std::int64_t CountCodePoints(std::string_view utf8);

// Database size under the chosen mode. Throws Error(kMissingFile) in
// file-bytes mode when the database file was not found at load time.
std::int64_t DbSize(const DatabaseSchema& schema, DbSizeMode mode);

class SchemaCatalog {
 public:
  // Throws Error(kMalformedRecord) if a schema with the same (source, db_id)
  // and different content is already present.
  void Add(DatabaseSchema schema);

  const DatabaseSchema* Find(Source source, std::string_view db_id) const;
  // Throws Error(kUnresolvedDbId).
  const DatabaseSchema& Get(Source source, std::string_view db_id) const;

  std::size_t size() const { return schemas_.size(); }
  void Merge(const SchemaCatalog& other);

 private:
  std::map<std::pair<Source, std::string>, DatabaseSchema, std::less<>>
      schemas_;
};

struct Example {
  std::string id;  // "<source>:<split>:<index>", e.g. "spider:train:17"
  std::string question;
  std::string sql;
  std::string db_id;
  Source source = Source::kSpider;
  Split split = Split::kTrain;
  // Index of the record within its source file.
  std::size_t original_index = 0;
  // BIRD evidence text, kept as opaque metadata.
  std::optional<std::string> evidence;
};

std::string MakeExampleId(Source source, Split split, std::size_t index);

struct Corpus {
  std::vector<Example> examples;
  SchemaCatalog schemas;

  std::vector<Example> Select(Source source, Split split) const;
  void Append(Corpus other);
};

// Loads the released Spider layout: train_spider.json, dev.json,
// tables.json and database/<db>/<db>.sqlite. Throws Error(kMissingFile),
// Error(kMalformedRecord) with the record index, or Error(kUnresolvedDbId).
Corpus LoadSpider(const std::filesystem::path& root);

// Loads the released BIRD layout: train/train.json with
// train/train_tables.json and dev/dev.json with dev/dev_tables.json
// (flattened layouts are also accepted). Same errors as LoadSpider.
Corpus LoadBird(const std::filesystem::path& root);

struct SchemaStats {
  std::size_t n_examples = 0;
  std::size_t n_dbs = 0;
  double tables_per_db = 0.0;
  double cols_per_table = 0.0;
  double fks_per_db = 0.0;
};

// Means over databases referenced by at least one example of the split;
// columns are averaged over all tables of those databases.
SchemaStats ComputeSchemaStats(std::span<const Example> examples,
                               const SchemaCatalog& schemas, Source source,
                               Split split);

struct ScoredExample {
  Example example;
  ComplexityScore score;
  bool parse_ok = true;
  std::size_t original_index = 0;
};

struct ScoringFailure {
  std::string id;
  std::string message;
};

struct ScoringOptions {
  DbSizeMode db_size_mode = DbSizeMode::kDdl;
  ComplexityWeights weights;
  // 0 selects hardware concurrency.
  int workers = 0;
};

// max_size over every database referenced by `examples`.
ScoringContext BuildScoringContext(std::span<const Example> examples,
                                   const SchemaCatalog& schemas,
                                   DbSizeMode mode);

struct MergeResult {
  std::vector<ScoredExample> sorted;
  std::vector<ScoringFailure> failures;
  std::int64_t max_size = 1;
};

// Scores all examples under a context built from their union and sorts by
// (total, source, split, original_index). Per-example scoring errors are
// collected in `failures`; the rest of the batch is still scored.
MergeResult MergeAndSort(std::span<const Example> examples,
                         const SchemaCatalog& schemas,
                         const ScoringOptions& options = {});

// Scores examples under an existing context, saturating the database term at
// 2 for databases larger than ctx.max_size(). Output keeps input order.
std::vector<ScoredExample> ScoreUnderContext(
    std::span<const Example> examples, const SchemaCatalog& schemas,
    const ScoringContext& ctx, const ScoringOptions& options,
    std::vector<ScoringFailure>* failures);

// Orders by (total, source, split, original_index).
void SortByComplexity(std::vector<ScoredExample>& scored);

class TieredDataset {
 public:
  const std::vector<ScoredExample>& sorted() const { return sorted_; }
  std::span<const ScoredExample> tier(Tier t) const;
  std::size_t tier_size(Tier t) const {
    return sizes_[static_cast<std::size_t>(t)];
  }
  Tier TierAt(std::size_t sorted_index) const;
  // Largest total in tier t.
  double UpperBound(Tier t) const;

 private:
  friend TieredDataset PartitionQuartiles(std::vector<ScoredExample> sorted);
  std::vector<ScoredExample> sorted_;
  std::array<std::size_t, 4> sizes_{};
};

// Splits a nondecreasing sequence into four contiguous tiers whose sizes
// differ by at most one; the first N mod 4 tiers take the extra elements.
// Throws Error(kEmptyDataset) when N < 4 and Error(kInvalidArgument) when
// the input is not sorted by total.
TieredDataset PartitionQuartiles(std::vector<ScoredExample> sorted);

// One row of an SB-CL JSON Lines file.
struct SbclRecord {
  std::string id;
  Source source = Source::kSpider;
  Split split = Split::kTrain;
  std::string db_id;
  std::string question;
  std::string sql;
  ComplexityScore score;
  Tier tier = Tier::kEasy;

  friend bool operator==(const SbclRecord&, const SbclRecord&) = default;
};

std::vector<SbclRecord> ToRecords(const TieredDataset& tiered);

// Assigns each scored example the first tier whose upper bound in `train`
// is >= its total (EXTRA otherwise).
std::vector<SbclRecord> AssignTiersByBounds(
    std::span<const ScoredExample> scored, const TieredDataset& train);

enum class DevTiering {
  kTrainBounds,  // first train tier whose upper bound covers the score
  kRequartile,   // each dev split partitioned into its own quartiles
};

// "train-bounds" or "requartile".
DevTiering ParseDevTiering(std::string_view name);

struct SbclBuildOptions {
  ScoringOptions scoring;
  DevTiering dev_tiering = DevTiering::kTrainBounds;
};

struct SbclBuild {
  // Merged train splits in SB-CL order with quartile tiers.
  std::vector<SbclRecord> train;
  // Dev splits scored under the train context (db term clamped at 2),
  // SPIDER first, each sorted by complexity.
  std::vector<SbclRecord> dev;
  std::vector<ScoringFailure> failures;
  std::int64_t max_size = 1;
};

// Runs the whole SB-CL construction over a loaded corpus. Throws
// Error(kEmptyDataset) when fewer than four train examples score.
SbclBuild BuildSbcl(const Corpus& corpus,
                    const SbclBuildOptions& options = {});

struct TierCounts {
  Source source = Source::kSpider;
  Split split = Split::kTrain;
  std::array<std::size_t, 4> counts{};
  double avg_score = 0.0;

  std::size_t total() const {
    return counts[0] + counts[1] + counts[2] + counts[3];
  }
};

// Per (source, split) tier histogram and mean total, ordered by
// (source, split).
std::vector<TierCounts> ComputeTierStats(std::span<const SbclRecord> records);

nlohmann::ordered_json ToJson(const SchemaStats& stats, Source source,
                              Split split);
nlohmann::ordered_json ToJson(const TierCounts& counts);

// SB-CL JSON Lines IO. Reading throws Error(kMalformedRecord) with the line
// number, Error(kMissingFile) when the file cannot be opened.
nlohmann::ordered_json ToJson(const SbclRecord& record);
SbclRecord SbclRecordFromJson(const nlohmann::json& j);
void WriteSbcl(const std::filesystem::path& path,
               std::span<const SbclRecord> records);
std::string SerializeSbcl(std::span<const SbclRecord> records);
std::vector<SbclRecord> ReadSbcl(const std::filesystem::path& path);

}  // namespace legoforge

#endif  // LEGOFORGE_DATASET_HPP_
