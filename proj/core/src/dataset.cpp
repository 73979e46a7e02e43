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

#include "legoforge/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <tuple>

#include "legoforge/error.hpp"
#include "legoforge/sql_analyzer.hpp"
#include "parallel.hpp"

namespace legoforge {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kMissingFile, path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord,
                path.string() + ": " + e.what());
  }
}

std::optional<fs::path> FirstExisting(const fs::path& root,
                                      std::initializer_list<const char*> rel) {
  for (const char* r : rel) {
    fs::path p = root / r;
    std::error_code ec;
    if (fs::exists(p, ec)) return p;
  }
  return std::nullopt;
}

fs::path RequireFile(const fs::path& root,
                     std::initializer_list<const char*> rel) {
  if (auto p = FirstExisting(root, rel)) return *p;
  throw Error(ErrorCode::kMissingFile,
              (root / *rel.begin()).string() + " not found");
}

std::string RequireString(const json& rec, const char* field,
                          const fs::path& file, std::size_t index) {
  auto it = rec.find(field);
  if (it == rec.end() || !it->is_string()) {
    throw Error(ErrorCode::kMalformedRecord,
                file.filename().string() + " record " + std::to_string(index) +
                    ": missing string field '" + field + "'");
  }
  return it->get<std::string>();
}

// Parses one entry of a Spider-format schema catalog.
DatabaseSchema ParseSchema(const json& rec, Source source,
                           const fs::path& file, std::size_t index) {
  auto malformed = [&](const std::string& what) {
    return Error(ErrorCode::kMalformedRecord,
                 file.filename().string() + " record " +
                     std::to_string(index) + ": " + what);
  };
  if (!rec.is_object()) throw malformed("not an object");
  DatabaseSchema s;
  s.source = source;
  s.db_id = RequireString(rec, "db_id", file, index);

  const char* names_key = rec.contains("table_names_original")
                              ? "table_names_original"
                              : "table_names";
  const char* cols_key = rec.contains("column_names_original")
                             ? "column_names_original"
                             : "column_names";
  if (!rec.contains(names_key) || !rec[names_key].is_array()) {
    throw malformed("missing table names");
  }
  if (!rec.contains(cols_key) || !rec[cols_key].is_array()) {
    throw malformed("missing column names");
  }
  std::set<std::string> seen;
  for (const auto& name : rec[names_key]) {
    if (!name.is_string()) throw malformed("table name is not a string");
    if (!seen.insert(name.get<std::string>()).second) {
      throw malformed("duplicate table '" + name.get<std::string>() + "'");
    }
    s.tables.push_back(Table{name.get<std::string>(), {}});
  }

  const json empty = json::array();
  const json& types = rec.contains("column_types") ? rec["column_types"] : empty;
  const json& cols = rec[cols_key];
  // (table index, column index within table) per global column index.
  std::vector<std::pair<int, std::size_t>> locate(cols.size(), {-1, 0});
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const json& col = cols[c];
    if (!col.is_array() || col.size() != 2 || !col[0].is_number_integer() ||
        !col[1].is_string()) {
      throw malformed("bad column entry " + std::to_string(c));
    }
    const int t = col[0].get<int>();
    if (t < 0) continue;  // the "*" pseudo column
    if (t >= static_cast<int>(s.tables.size())) {
      throw malformed("column " + std::to_string(c) + " names table " +
                      std::to_string(t));
    }
    std::string type =
        c < types.size() && types[c].is_string() ? types[c].get<std::string>()
                                                 : std::string("text");
    auto& table = s.tables[static_cast<std::size_t>(t)];
    locate[c] = {t, table.columns.size()};
    table.columns.push_back(Column{col[1].get<std::string>(), std::move(type)});
  }

  if (rec.contains("foreign_keys")) {
    for (const auto& fk : rec["foreign_keys"]) {
      if (!fk.is_array() || fk.size() != 2 || !fk[0].is_number_integer() ||
          !fk[1].is_number_integer()) {
        throw malformed("bad foreign key entry");
      }
      const auto from = fk[0].get<long long>();
      const auto to = fk[1].get<long long>();
      auto valid = [&](long long c) {
        return c >= 0 && c < static_cast<long long>(locate.size()) &&
               locate[static_cast<std::size_t>(c)].first >= 0;
      };
      if (!valid(from) || !valid(to)) {
        throw malformed("foreign key endpoint does not name a table column");
      }
      const auto [ft, fc] = locate[static_cast<std::size_t>(from)];
      const auto [tt, tc] = locate[static_cast<std::size_t>(to)];
      const auto& ftab = s.tables[static_cast<std::size_t>(ft)];
      const auto& ttab = s.tables[static_cast<std::size_t>(tt)];
      s.foreign_keys.push_back(ForeignKey{ftab.name, ftab.columns[fc].name,
                                          ttab.name, ttab.columns[tc].name});
    }
  }
  s.ddl_char_count = CountCodePoints(CanonicalDdl(s));
  return s;
}

void LoadCatalog(const fs::path& file, Source source,
                 const std::vector<fs::path>& db_dirs, SchemaCatalog& out) {
  const json doc = ReadJsonFile(file);
  if (!doc.is_array()) {
    throw Error(ErrorCode::kMalformedRecord,
                file.string() + ": expected a JSON array");
  }
  for (std::size_t i = 0; i < doc.size(); ++i) {
    DatabaseSchema s = ParseSchema(doc[i], source, file, i);
    for (const auto& dir : db_dirs) {
      const fs::path db_file = dir / s.db_id / (s.db_id + ".sqlite");
      std::error_code ec;
      const auto size = fs::file_size(db_file, ec);
      if (!ec) {
        s.file_byte_size = static_cast<std::int64_t>(size);
        break;
      }
    }
    out.Add(std::move(s));
  }
}

void LoadQueries(const fs::path& file, Source source, Split split,
                 const char* sql_field, const SchemaCatalog& catalog,
                 std::vector<Example>& out) {
  const json doc = ReadJsonFile(file);
  if (!doc.is_array()) {
    throw Error(ErrorCode::kMalformedRecord,
                file.string() + ": expected a JSON array");
  }
  out.reserve(out.size() + doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    if (!rec.is_object()) {
      throw Error(ErrorCode::kMalformedRecord,
                  file.filename().string() + " record " + std::to_string(i) +
                      ": not an object");
    }
    Example ex;
    ex.source = source;
    ex.split = split;
    ex.original_index = i;
    ex.id = MakeExampleId(source, split, i);
    ex.question = RequireString(rec, "question", file, i);
    ex.sql = RequireString(rec, sql_field, file, i);
    ex.db_id = RequireString(rec, "db_id", file, i);
    if (ex.sql.empty()) {
      throw Error(ErrorCode::kMalformedRecord,
                  file.filename().string() + " record " + std::to_string(i) +
                      ": empty SQL");
    }
    if (auto ev = rec.find("evidence"); ev != rec.end() && ev->is_string()) {
      ex.evidence = ev->get<std::string>();
    }
    if (catalog.Find(source, ex.db_id) == nullptr) {
      throw Error(ErrorCode::kUnresolvedDbId,
                  file.filename().string() + " record " + std::to_string(i) +
                      ": unknown db_id '" + ex.db_id + "'");
    }
    out.push_back(std::move(ex));
  }
}

bool SameSchema(const DatabaseSchema& a, const DatabaseSchema& b) {
  return CanonicalDdl(a) == CanonicalDdl(b);
}

auto SortKey(const ScoredExample& s) {
  return std::make_tuple(s.score.total, static_cast<int>(s.example.source),
                         static_cast<int>(s.example.split), s.original_index);
}

}  // namespace

std::string_view SourceName(Source s) {
  return s == Source::kSpider ? "SPIDER" : "BIRD";
}

std::string_view SplitName(Split s) {
  return s == Split::kTrain ? "train" : "dev";
}

std::string_view TierName(Tier t) {
  switch (t) {
    case Tier::kEasy: return "EASY";
    case Tier::kMedium: return "MEDIUM";
    case Tier::kHard: return "HARD";
    case Tier::kExtra: return "EXTRA";
  }
  return "?";
}

Source ParseSource(std::string_view name) {
  if (name == "SPIDER" || name == "spider") return Source::kSpider;
  if (name == "BIRD" || name == "bird") return Source::kBird;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown source '" + std::string(name) + "'");
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown split '" + std::string(name) + "'");
}

Tier ParseTier(std::string_view name) {
  for (Tier t : kAllTiers) {
    if (TierName(t) == name) return t;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown tier '" + std::string(name) + "'");
}

DbSizeMode ParseDbSizeMode(std::string_view name) {
  if (name == "ddl") return DbSizeMode::kDdl;
  if (name == "file-bytes") return DbSizeMode::kFileBytes;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown db-size mode '" + std::string(name) + "'");
}

std::string CanonicalDdl(const DatabaseSchema& schema) {
  std::string out;
  for (std::size_t t = 0; t < schema.tables.size(); ++t) {
    const Table& table = schema.tables[t];
    if (t > 0) out += '\n';
    out += "CREATE TABLE " + table.name + " (";
    bool first = true;
    for (const Column& c : table.columns) {
      if (!first) out += ", ";
      first = false;
      out += c.name + " " + c.type;
    }
    for (const ForeignKey& fk : schema.foreign_keys) {
      if (fk.from_table != table.name) continue;
      if (!first) out += ", ";
      first = false;
      out += "FOREIGN KEY (" + fk.from_column + ") REFERENCES " + fk.to_table +
             " (" + fk.to_column + ")";
    }
    out += ");";
  }
  return out;
}

std::int64_t CountCodePoints(std::string_view utf8) {
  std::int64_t n = 0;
  for (unsigned char c : utf8) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::int64_t DbSize(const DatabaseSchema& schema, DbSizeMode mode) {
  if (mode == DbSizeMode::kDdl) return schema.ddl_char_count;
  if (!schema.file_byte_size) {
    throw Error(ErrorCode::kMissingFile,
                "no database file for '" + schema.db_id + "'");
  }
  return *schema.file_byte_size;
}

void SchemaCatalog::Add(DatabaseSchema schema) {
  auto key = std::make_pair(schema.source, schema.db_id);
  auto it = schemas_.find(key);
  if (it != schemas_.end()) {
    if (!SameSchema(it->second, schema)) {
      throw Error(ErrorCode::kMalformedRecord,
                  "conflicting schemas for db_id '" + schema.db_id + "'");
    }
    if (!it->second.file_byte_size) {
      it->second.file_byte_size = schema.file_byte_size;
    }
    return;
  }
  schemas_.emplace(std::move(key), std::move(schema));
}

const DatabaseSchema* SchemaCatalog::Find(Source source,
                                          std::string_view db_id) const {
  auto it = schemas_.find(std::make_pair(source, std::string(db_id)));
  return it == schemas_.end() ? nullptr : &it->second;
}

const DatabaseSchema& SchemaCatalog::Get(Source source,
                                         std::string_view db_id) const {
  if (const auto* s = Find(source, db_id)) return *s;
  throw Error(ErrorCode::kUnresolvedDbId,
              std::string(SourceName(source)) + " db_id '" +
                  std::string(db_id) + "'");
}

void SchemaCatalog::Merge(const SchemaCatalog& other) {
  for (const auto& [key, schema] : other.schemas_) Add(schema);
}

std::string MakeExampleId(Source source, Split split, std::size_t index) {
  return std::string(source == Source::kSpider ? "spider" : "bird") + ":" +
         std::string(SplitName(split)) + ":" + std::to_string(index);
}

std::vector<Example> Corpus::Select(Source source, Split split) const {
  std::vector<Example> out;
  for (const auto& e : examples) {
    if (e.source == source && e.split == split) out.push_back(e);
  }
  return out;
}

void Corpus::Append(Corpus other) {
  schemas.Merge(other.schemas);
  examples.insert(examples.end(),
                  std::make_move_iterator(other.examples.begin()),
                  std::make_move_iterator(other.examples.end()));
}

Corpus LoadSpider(const fs::path& root) {
  const fs::path train = RequireFile(root, {"train_spider.json"});
  const fs::path dev = RequireFile(root, {"dev.json"});
  const fs::path tables = RequireFile(root, {"tables.json"});
  Corpus c;
  LoadCatalog(tables, Source::kSpider, {root / "database"}, c.schemas);
  LoadQueries(train, Source::kSpider, Split::kTrain, "query", c.schemas,
              c.examples);
  LoadQueries(dev, Source::kSpider, Split::kDev, "query", c.schemas,
              c.examples);
  return c;
}

Corpus LoadBird(const fs::path& root) {
  const fs::path train = RequireFile(root, {"train/train.json", "train.json"});
  const fs::path train_tables =
      RequireFile(root, {"train/train_tables.json", "train_tables.json"});
  const fs::path dev = RequireFile(root, {"dev/dev.json", "dev.json"});
  const fs::path dev_tables =
      RequireFile(root, {"dev/dev_tables.json", "dev_tables.json"});
  const std::vector<fs::path> db_dirs = {
      root / "train" / "train_databases", root / "train_databases",
      root / "dev" / "dev_databases", root / "dev_databases"};
  Corpus c;
  LoadCatalog(train_tables, Source::kBird, db_dirs, c.schemas);
  LoadCatalog(dev_tables, Source::kBird, db_dirs, c.schemas);
  LoadQueries(train, Source::kBird, Split::kTrain, "SQL", c.schemas,
              c.examples);
  LoadQueries(dev, Source::kBird, Split::kDev, "SQL", c.schemas, c.examples);
  return c;
}

SchemaStats ComputeSchemaStats(std::span<const Example> examples,
                               const SchemaCatalog& schemas, Source source,
                               Split split) {
  SchemaStats st;
  std::set<std::string> dbs;
  for (const auto& e : examples) {
    if (e.source != source || e.split != split) continue;
    ++st.n_examples;
    dbs.insert(e.db_id);
  }
  st.n_dbs = dbs.size();
  if (dbs.empty()) return st;
  std::size_t tables = 0;
  std::size_t columns = 0;
  std::size_t fks = 0;
  for (const auto& id : dbs) {
    const DatabaseSchema& s = schemas.Get(source, id);
    tables += s.tables.size();
    fks += s.foreign_keys.size();
    for (const auto& t : s.tables) columns += t.columns.size();
  }
  st.tables_per_db =
      static_cast<double>(tables) / static_cast<double>(dbs.size());
  st.cols_per_table =
      tables == 0 ? 0.0
                  : static_cast<double>(columns) / static_cast<double>(tables);
  st.fks_per_db = static_cast<double>(fks) / static_cast<double>(dbs.size());
  return st;
}

ScoringContext BuildScoringContext(std::span<const Example> examples,
                                   const SchemaCatalog& schemas,
                                   DbSizeMode mode) {
  std::int64_t max_size = 1;
  for (const auto& e : examples) {
    const DatabaseSchema* s = schemas.Find(e.source, e.db_id);
    if (s == nullptr) continue;
    if (mode == DbSizeMode::kFileBytes && !s->file_byte_size) continue;
    max_size = std::max(max_size, DbSize(*s, mode));
  }
  return ScoringContext(max_size);
}

void SortByComplexity(std::vector<ScoredExample>& scored) {
  std::sort(scored.begin(), scored.end(),
            [](const ScoredExample& a, const ScoredExample& b) {
              return SortKey(a) < SortKey(b);
            });
}

std::vector<ScoredExample> ScoreUnderContext(
    std::span<const Example> examples, const SchemaCatalog& schemas,
    const ScoringContext& ctx, const ScoringOptions& options,
    std::vector<ScoringFailure>* failures) {
  options.weights.Validate();
  std::vector<std::optional<ScoredExample>> slots(examples.size());
  std::vector<std::string> errors(examples.size());
  internal::ParallelFor(examples.size(), options.workers, [&](std::size_t i) {
    const Example& e = examples[i];
    try {
      const sql::QueryShape shape = sql::Analyze(e.sql);
      const DatabaseSchema& schema = schemas.Get(e.source, e.db_id);
      ScoredExample s;
      s.example = e;
      s.parse_ok = shape.parse_ok;
      s.original_index = e.original_index;
      s.score = ScoreComplexityClamped(
          shape, DbSize(schema, options.db_size_mode), ctx, options.weights);
      slots[i] = std::move(s);
    } catch (const Error& err) {
      errors[i] = err.what();
    }
  });
  std::vector<ScoredExample> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      out.push_back(std::move(*slots[i]));
    } else if (failures != nullptr) {
      failures->push_back(ScoringFailure{examples[i].id, errors[i]});
    }
  }
  return out;
}

MergeResult MergeAndSort(std::span<const Example> examples,
                         const SchemaCatalog& schemas,
                         const ScoringOptions& options) {
  MergeResult r;
  const ScoringContext ctx =
      BuildScoringContext(examples, schemas, options.db_size_mode);
  r.max_size = ctx.max_size();
  r.sorted = ScoreUnderContext(examples, schemas, ctx, options, &r.failures);
  SortByComplexity(r.sorted);
  return r;
}

std::span<const ScoredExample> TieredDataset::tier(Tier t) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(t); ++i) {
    offset += sizes_[i];
  }
  return std::span<const ScoredExample>(sorted_).subspan(
      offset, sizes_[static_cast<std::size_t>(t)]);
}

Tier TieredDataset::TierAt(std::size_t sorted_index) const {
  std::size_t end = 0;
  for (Tier t : kAllTiers) {
    end += sizes_[static_cast<std::size_t>(t)];
    if (sorted_index < end) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "index outside the dataset");
}

double TieredDataset::UpperBound(Tier t) const {
  return tier(t).back().score.total;
}

TieredDataset PartitionQuartiles(std::vector<ScoredExample> sorted) {
  const std::size_t n = sorted.size();
  if (n < 4) {
    throw Error(ErrorCode::kEmptyDataset,
                "need at least 4 examples to form tiers, got " +
                    std::to_string(n));
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (sorted[i].score.total < sorted[i - 1].score.total) {
      throw Error(ErrorCode::kInvalidArgument,
                  "input not sorted by total at index " + std::to_string(i));
    }
  }
  TieredDataset d;
  const std::size_t base = n / 4;
  const std::size_t extra = n % 4;
  for (std::size_t t = 0; t < 4; ++t) {
    d.sizes_[t] = base + (t < extra ? 1 : 0);
  }
  d.sorted_ = std::move(sorted);
  return d;
}

namespace {

SbclRecord ToRecord(const ScoredExample& s, Tier tier) {
  SbclRecord r;
  r.id = s.example.id;
  r.source = s.example.source;
  r.split = s.example.split;
  r.db_id = s.example.db_id;
  r.question = s.example.question;
  r.sql = s.example.sql;
  r.score = s.score;
  r.tier = tier;
  return r;
}

}  // namespace

std::vector<SbclRecord> ToRecords(const TieredDataset& tiered) {
  std::vector<SbclRecord> out;
  out.reserve(tiered.sorted().size());
  for (std::size_t i = 0; i < tiered.sorted().size(); ++i) {
    out.push_back(ToRecord(tiered.sorted()[i], tiered.TierAt(i)));
  }
  return out;
}

std::vector<SbclRecord> AssignTiersByBounds(
    std::span<const ScoredExample> scored, const TieredDataset& train) {
  std::vector<SbclRecord> out;
  out.reserve(scored.size());
  for (const auto& s : scored) {
    Tier tier = Tier::kExtra;
    for (Tier t : {Tier::kEasy, Tier::kMedium, Tier::kHard}) {
      if (s.score.total <= train.UpperBound(t)) {
        tier = t;
        break;
      }
    }
    out.push_back(ToRecord(s, tier));
  }
  return out;
}

DevTiering ParseDevTiering(std::string_view name) {
  if (name == "train-bounds") return DevTiering::kTrainBounds;
  if (name == "requartile") return DevTiering::kRequartile;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown dev tiering '" + std::string(name) + "'");
}

SbclBuild BuildSbcl(const Corpus& corpus, const SbclBuildOptions& options) {
  std::vector<Example> train;
  for (Source source : {Source::kSpider, Source::kBird}) {
    for (auto& e : corpus.Select(source, Split::kTrain)) {
      train.push_back(std::move(e));
    }
  }
  SbclBuild out;
  MergeResult merged = MergeAndSort(train, corpus.schemas, options.scoring);
  out.max_size = merged.max_size;
  out.failures = std::move(merged.failures);
  const TieredDataset tiered = PartitionQuartiles(std::move(merged.sorted));
  out.train = ToRecords(tiered);

  const ScoringContext ctx(out.max_size);
  for (Source source : {Source::kSpider, Source::kBird}) {
    const std::vector<Example> dev = corpus.Select(source, Split::kDev);
    if (dev.empty()) continue;
    std::vector<ScoredExample> scored = ScoreUnderContext(
        dev, corpus.schemas, ctx, options.scoring, &out.failures);
    SortByComplexity(scored);
    std::vector<SbclRecord> records =
        options.dev_tiering == DevTiering::kTrainBounds
            ? AssignTiersByBounds(scored, tiered)
            : ToRecords(PartitionQuartiles(std::move(scored)));
    out.dev.insert(out.dev.end(), std::make_move_iterator(records.begin()),
                   std::make_move_iterator(records.end()));
  }
  return out;
}

std::vector<TierCounts> ComputeTierStats(std::span<const SbclRecord> records) {
  std::map<std::pair<Source, Split>, std::pair<TierCounts, double>> acc;
  for (const auto& r : records) {
    auto& [counts, sum] = acc[{r.source, r.split}];
    counts.source = r.source;
    counts.split = r.split;
    ++counts.counts[static_cast<std::size_t>(r.tier)];
    sum += r.score.total;
  }
  std::vector<TierCounts> out;
  for (auto& [key, value] : acc) {
    auto& [counts, sum] = value;
    counts.avg_score = sum / static_cast<double>(counts.total());
    out.push_back(counts);
  }
  return out;
}

nlohmann::ordered_json ToJson(const SchemaStats& st, Source source,
                              Split split) {
  return nlohmann::ordered_json{
      {"dataset", SourceName(source)},
      {"subset", SplitName(split)},
      {"n_examples", st.n_examples},
      {"n_dbs", st.n_dbs},
      {"tables_per_db", st.tables_per_db},
      {"cols_per_table", st.cols_per_table},
      {"fks_per_db", st.fks_per_db},
  };
}

nlohmann::ordered_json ToJson(const TierCounts& c) {
  return nlohmann::ordered_json{
      {"dataset", SourceName(c.source)}, {"subset", SplitName(c.split)},
      {"easy", c.counts[0]},             {"medium", c.counts[1]},
      {"hard", c.counts[2]},             {"extra", c.counts[3]},
      {"n", c.total()},                  {"avg_score", c.avg_score},
  };
}

}  // namespace legoforge
