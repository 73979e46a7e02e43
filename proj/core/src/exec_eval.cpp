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

#include "legoforge/exec_eval.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <system_error>

#include "legoforge/error.hpp"
#include "legoforge/sql_analyzer.hpp"
#include "parallel.hpp"

namespace legoforge::eval {
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StmtFinalizer {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};
using DbHandle = std::unique_ptr<sqlite3, DbCloser>;
using StmtHandle = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

struct Deadline {
  Clock::time_point at;
  bool expired = false;
};

int ProgressHandler(void* arg) {
  auto* d = static_cast<Deadline*>(arg);
  if (Clock::now() >= d->at) {
    d->expired = true;
    return 1;
  }
  return 0;
}

bool LooksLikeParseError(std::string_view msg) {
  return msg.find("syntax error") != std::string_view::npos ||
         msg.find("incomplete input") != std::string_view::npos ||
         msg.find("unrecognized token") != std::string_view::npos;
}

bool IsUnreadable(int code) {
  const int primary = code & 0xFF;
  return primary == SQLITE_NOTADB || primary == SQLITE_CANTOPEN ||
         primary == SQLITE_CORRUPT;
}

Cell ReadCell(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER:
      return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return sqlite3_column_double(stmt, col);
    case SQLITE_TEXT: {
      const auto* p = sqlite3_column_text(stmt, col);
      const int n = sqlite3_column_bytes(stmt, col);
      return std::string(reinterpret_cast<const char*>(p),
                         static_cast<std::size_t>(n));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const unsigned char*>(
          sqlite3_column_blob(stmt, col));
      const int n = sqlite3_column_bytes(stmt, col);
      return Blob{std::vector<unsigned char>(p, p + n)};
    }
    default:
      return std::monostate{};
  }
}

int TypeRank(const Cell& c) {
  switch (c.index()) {
    case 0: return 0;
    case 1:
    case 2: return 1;
    case 3: return 2;
    default: return 3;
  }
}

double AsDouble(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) {
    return static_cast<double>(*i);
  }
  return std::get<double>(c);
}

// Total order used to canonicalize row multisets before comparison.
int CompareCells(const Cell& a, const Cell& b) {
  const int ra = TypeRank(a);
  const int rb = TypeRank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (ra) {
    case 0:
      return 0;
    case 1: {
      if (a.index() == 1 && b.index() == 1) {
        const auto x = std::get<std::int64_t>(a);
        const auto y = std::get<std::int64_t>(b);
        return x < y ? -1 : (y < x ? 1 : 0);
      }
      const double x = AsDouble(a);
      const double y = AsDouble(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
    case 2:
      return std::get<std::string>(a).compare(std::get<std::string>(b));
    default: {
      const auto& x = std::get<Blob>(a).bytes;
      const auto& y = std::get<Blob>(b).bytes;
      return x < y ? -1 : (y < x ? 1 : 0);
    }
  }
}

bool RowLess(const Row& a, const Row& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int c = CompareCells(a[i], b[i]);
    if (c != 0) return c < 0;
  }
  return a.size() < b.size();
}

bool RowsEqual(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!CellsEqual(a[i], b[i])) return false;
  }
  return true;
}

bool SequencesEqual(const std::vector<Row>& a, const std::vector<Row>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!RowsEqual(a[i], b[i])) return false;
  }
  return true;
}

PairVerdict ScorePair(const EvalPair& pair, const fs::path& db_root,
                      int timeout_ms) {
  PairVerdict v{pair.id, pair.tier, false, {}};
  if (!pair.pred_sql) {
    v.reason = "missing prediction";
    return v;
  }
  const fs::path db = DatabasePath(db_root, pair.db_id);
  try {
    const ExecOutcome gold = ExecuteQuery(db, pair.gold_sql, timeout_ms);
    const ExecOutcome pred = ExecuteQuery(db, *pair.pred_sql, timeout_ms);
    if (!gold.ok()) {
      v.reason = "gold error (" +
                 std::string(ErrorKindName(*gold.error_kind)) +
                 "): " + gold.error_message;
    } else if (!pred.ok()) {
      v.reason = "prediction error (" +
                 std::string(ErrorKindName(*pred.error_kind)) +
                 "): " + pred.error_message;
    } else if (CompareResults(gold, pred,
                              sql::HasTopLevelOrderBy(pair.gold_sql))) {
      v.matched = true;
    } else {
      v.reason = "result mismatch";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDbUnreadable) throw;
    v.reason = e.what();
  }
  return v;
}

double Percent(std::size_t matches, std::size_t n) {
  return n == 0 ? 0.0
                : 100.0 * static_cast<double>(matches) / static_cast<double>(n);
}

}  // namespace

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax: return "Syntax";
    case ErrorKind::kRuntime: return "Runtime";
    case ErrorKind::kTimeout: return "Timeout";
  }
  return "?";
}

ExecOutcome ExecOutcome::FromRows(std::vector<Row> rows) {
  ExecOutcome o;
  o.rows = std::move(rows);
  return o;
}

ExecOutcome ExecOutcome::FromError(ErrorKind kind, std::string message) {
  ExecOutcome o;
  o.error_kind = kind;
  o.error_message = std::move(message);
  return o;
}

ExecOutcome ExecuteQuery(const fs::path& db_path, std::string_view sql,
                         int timeout_ms) {
  std::error_code ec;
  if (!fs::is_regular_file(db_path, ec)) {
    throw Error(ErrorCode::kDbUnreadable, db_path.string() + " not found");
  }
  const auto start = Clock::now();
  sqlite3* raw = nullptr;
  const int open_rc = sqlite3_open_v2(
      db_path.c_str(), &raw, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX,
      nullptr);
  DbHandle db(raw);
  if (open_rc != SQLITE_OK) {
    throw Error(ErrorCode::kDbUnreadable,
                db_path.string() + ": " +
                    (raw ? sqlite3_errmsg(raw) : sqlite3_errstr(open_rc)));
  }

  // Opening is lazy; reading the schema surfaces non-database files.
  const int probe_rc =
      sqlite3_exec(db.get(), "SELECT count(*) FROM sqlite_master", nullptr,
                   nullptr, nullptr);
  if (probe_rc != SQLITE_OK) {
    throw Error(ErrorCode::kDbUnreadable,
                db_path.string() + ": " + sqlite3_errmsg(db.get()));
  }

  Deadline deadline{start + std::chrono::milliseconds(timeout_ms)};
  sqlite3_progress_handler(db.get(), 1000, &ProgressHandler, &deadline);

  auto finish = [&](ExecOutcome o) {
    o.elapsed_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return o;
  };

  sqlite3_stmt* raw_stmt = nullptr;
  const int prep_rc =
      sqlite3_prepare_v2(db.get(), sql.data(), static_cast<int>(sql.size()),
                         &raw_stmt, nullptr);
  StmtHandle stmt(raw_stmt);
  if (prep_rc != SQLITE_OK) {
    const std::string msg = sqlite3_errmsg(db.get());
    if (IsUnreadable(prep_rc)) {
      throw Error(ErrorCode::kDbUnreadable, db_path.string() + ": " + msg);
    }
    if (deadline.expired) {
      return finish(ExecOutcome::FromError(ErrorKind::kTimeout));
    }
    return finish(ExecOutcome::FromError(
        LooksLikeParseError(msg) ? ErrorKind::kSyntax : ErrorKind::kRuntime,
        msg));
  }
  if (!stmt) {
    // Empty statement or only comments.
    return finish(
        ExecOutcome::FromError(ErrorKind::kSyntax, "empty statement"));
  }

  std::vector<Row> rows;
  const int ncol = sqlite3_column_count(stmt.get());
  for (;;) {
    const int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_ROW) {
      Row row;
      row.reserve(static_cast<std::size_t>(ncol));
      for (int c = 0; c < ncol; ++c) row.push_back(ReadCell(stmt.get(), c));
      rows.push_back(std::move(row));
      continue;
    }
    if (rc == SQLITE_DONE) break;
    if (deadline.expired || (rc & 0xFF) == SQLITE_INTERRUPT) {
      return finish(ExecOutcome::FromError(ErrorKind::kTimeout,
                                           "exceeded " +
                                               std::to_string(timeout_ms) +
                                               " ms"));
    }
    if (IsUnreadable(rc)) {
      throw Error(ErrorCode::kDbUnreadable,
                  db_path.string() + ": " + sqlite3_errmsg(db.get()));
    }
    return finish(
        ExecOutcome::FromError(ErrorKind::kRuntime, sqlite3_errmsg(db.get())));
  }
  return finish(ExecOutcome::FromRows(std::move(rows)));
}

bool CellsEqual(const Cell& a, const Cell& b) {
  const int ra = TypeRank(a);
  if (ra != TypeRank(b)) return false;
  if (ra != 1) return CompareCells(a, b) == 0;
  if (a.index() == 1 && b.index() == 1) {
    return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
  }
  const double x = AsDouble(a);
  const double y = AsDouble(b);
  if (x == y) return true;
  return std::abs(x - y) <=
         kNumericRelTolerance * std::max(std::abs(x), std::abs(y));
}

bool CompareResults(const ExecOutcome& gold, const ExecOutcome& pred,
                    bool gold_has_order_by) {
  if (!gold.ok() || !pred.ok()) return false;
  if (gold.rows.size() != pred.rows.size()) return false;
  if (gold_has_order_by) return SequencesEqual(gold.rows, pred.rows);
  std::vector<Row> a = gold.rows;
  std::vector<Row> b = pred.rows;
  std::sort(a.begin(), a.end(), RowLess);
  std::sort(b.begin(), b.end(), RowLess);
  return SequencesEqual(a, b);
}

fs::path DatabasePath(const fs::path& db_root, std::string_view db_id) {
  const std::string id(db_id);
  return db_root / id / (id + ".sqlite");
}

EXReport ExecutionAccuracy(std::span<const EvalPair> pairs,
                           const fs::path& db_root,
                           const EvalOptions& options) {
  std::vector<PairVerdict> verdicts(pairs.size());
  internal::ParallelFor(pairs.size(), options.workers, [&](std::size_t i) {
    verdicts[i] = ScorePair(pairs[i], db_root, options.timeout_ms);
  });

  EXReport r;
  r.n = pairs.size();
  r.empty_warning = pairs.empty();
  for (const auto& v : verdicts) {
    auto& tier = r.per_tier[static_cast<std::size_t>(v.tier)];
    ++tier.n;
    if (v.matched) {
      ++tier.matches;
      ++r.matches;
    }
  }
  for (auto& t : r.per_tier) t.accuracy = Percent(t.matches, t.n);
  r.overall_accuracy = Percent(r.matches, r.n);
  r.per_pair = std::move(verdicts);
  return r;
}

nlohmann::ordered_json EXReport::ToJson() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["matches"] = matches;
  j["overall_accuracy"] = overall_accuracy;
  j["empty_warning"] = empty_warning;
  nlohmann::ordered_json tiers = nlohmann::ordered_json::object();
  for (Tier t : kAllTiers) {
    const auto& acc = per_tier[static_cast<std::size_t>(t)];
    tiers[std::string(TierName(t))] = {
        {"n", acc.n}, {"matches", acc.matches}, {"accuracy", acc.accuracy}};
  }
  j["per_tier"] = tiers;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& v : per_pair) {
    pairs.push_back({{"id", v.id},
                     {"tier", TierName(v.tier)},
                     {"matched", v.matched},
                     {"reason", v.reason}});
  }
  j["per_pair"] = pairs;
  return j;
}

std::string TierMatrixCsv(
    std::span<const std::pair<std::string, EXReport>> reports) {
  for (std::size_t r = 1; r < reports.size(); ++r) {
    const auto& a = reports[0].second.per_pair;
    const auto& b = reports[r].second.per_pair;
    const bool same = a.size() == b.size() &&
                      std::equal(a.begin(), a.end(), b.begin(),
                                 [](const PairVerdict& x, const PairVerdict& y) {
                                   return x.id == y.id && x.tier == y.tier;
                                 });
    if (!same) {
      throw Error(ErrorCode::kInconsistentPairSets,
                  "report '" + reports[r].first + "' differs from '" +
                      reports[0].first + "'");
    }
  }
  std::string csv = "composition";
  for (Tier t : kAllTiers) csv += "," + std::string(TierName(t));
  csv += '\n';
  for (const auto& [label, report] : reports) {
    csv += label;
    for (const auto& acc : report.per_tier) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",%.2f", acc.accuracy);
      csv += buf;
    }
    csv += '\n';
  }
  return csv;
}

std::map<std::string, std::string> ReadPredictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out[j.at("id").get<std::string>()] = j.at("pred_sql").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.filename().string() + " line " +
                      std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<EvalPair> JoinPredictions(
    std::span<const SbclRecord> gold,
    const std::map<std::string, std::string>& predictions) {
  std::vector<EvalPair> pairs;
  pairs.reserve(gold.size());
  for (const auto& g : gold) {
    EvalPair p{g.id, g.db_id, g.sql, std::nullopt, g.tier};
    if (auto it = predictions.find(g.id); it != predictions.end()) {
      p.pred_sql = it->second;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace legoforge::eval
