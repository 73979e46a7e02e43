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

#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "legoforge/sql_analyzer.hpp"

namespace legoforge::eval {
namespace {

namespace fs = std::filesystem;
using legoforge::testing::DataDir;
using legoforge::testing::ReadJsonFile;

class ExecFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(legoforge::testing::BuildFixtureDbRoot(
        legoforge::testing::MakeTempDir("exec")));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
    root_ = nullptr;
  }
  static fs::path Db() { return DatabasePath(*root_, "company"); }

  static std::vector<EvalPair> FixturePairs() {
    std::vector<EvalPair> pairs;
    for (const auto& j : ReadJsonFile(DataDir() / "exec_fixture" /
                                      "pairs.json")) {
      pairs.push_back(EvalPair{j.at("id"), j.at("db_id"), j.at("gold"),
                               j.at("pred").get<std::string>(),
                               ParseTier(j.at("tier").get<std::string>())});
    }
    return pairs;
  }

  static fs::path* root_;
};

fs::path* ExecFixture::root_ = nullptr;

ExecOutcome Rows(std::vector<Row> rows) {
  return ExecOutcome::FromRows(std::move(rows));
}

TEST_F(ExecFixture, SelectOne) {
  const ExecOutcome r = ExecuteQuery(Db(), "SELECT 1");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0], Row{Cell{std::int64_t{1}}});
}

TEST_F(ExecFixture, SyntaxError) {
  const ExecOutcome r = ExecuteQuery(Db(), "SELEC 1");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.error_kind, ErrorKind::kSyntax);
}

TEST_F(ExecFixture, RuntimeError) {
  const ExecOutcome r = ExecuteQuery(Db(), "SELECT nope FROM employee");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.error_kind, ErrorKind::kRuntime);
}

TEST_F(ExecFixture, CrossJoinTimesOut) {
  const ExecOutcome r = ExecuteQuery(
      Db(),
      "SELECT count(*) FROM employee a, employee b, employee c, employee d, "
      "employee e, employee f",
      10);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.error_kind, ErrorKind::kTimeout);
}

TEST_F(ExecFixture, ReadOnlyConnection) {
  const ExecOutcome r = ExecuteQuery(Db(), "DELETE FROM employee");
  EXPECT_FALSE(r.ok());
  const ExecOutcome count = ExecuteQuery(Db(), "SELECT count(*) FROM employee");
  ASSERT_TRUE(count.ok());
  EXPECT_EQ(count.rows[0][0], Cell{std::int64_t{20}});
}

TEST_F(ExecFixture, CellTypes) {
  const ExecOutcome r =
      ExecuteQuery(Db(), "SELECT NULL, 2, 2.5, 'x', x'0aff'");
  ASSERT_TRUE(r.ok());
  const Row& row = r.rows[0];
  EXPECT_TRUE(std::holds_alternative<std::monostate>(row[0]));
  EXPECT_EQ(row[1], Cell{std::int64_t{2}});
  EXPECT_EQ(row[2], Cell{2.5});
  EXPECT_EQ(row[3], Cell{std::string("x")});
  EXPECT_EQ(row[4], (Cell{Blob{{0x0a, 0xff}}}));
}

TEST(ExecuteQuery, UnreadableDatabase) {
  const fs::path dir = legoforge::testing::MakeTempDir("unreadable");
  try {
    ExecuteQuery(dir / "missing.sqlite", "SELECT 1");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDbUnreadable);
  }
  std::ofstream(dir / "junk.sqlite") << std::string(4096, 'j');
  EXPECT_THROW(ExecuteQuery(dir / "junk.sqlite", "SELECT 1"), Error);
}

TEST(CompareResults, OrderInsensitiveWithoutOrderBy) {
  const Cell one{std::int64_t{1}}, two{std::int64_t{2}};
  EXPECT_TRUE(CompareResults(Rows({{one}, {two}}), Rows({{two}, {one}}),
                             false));
  EXPECT_FALSE(CompareResults(Rows({{one}, {two}}), Rows({{two}, {one}}),
                              true));
}

TEST(CompareResults, ErrorsNeverMatch) {
  const ExecOutcome ok = Rows({{Cell{std::int64_t{1}}}});
  const ExecOutcome err = ExecOutcome::FromError(ErrorKind::kRuntime);
  EXPECT_FALSE(CompareResults(ok, err, false));
  EXPECT_FALSE(CompareResults(err, ok, false));
  EXPECT_FALSE(CompareResults(err, err, false));
}

TEST(CompareResults, MultisetNotSet) {
  const Cell one{std::int64_t{1}}, two{std::int64_t{2}};
  EXPECT_FALSE(CompareResults(Rows({{one}, {two}}), Rows({{one}, {two}, {two}}),
                              false));
  EXPECT_FALSE(CompareResults(Rows({{one}, {one}, {two}}),
                              Rows({{one}, {two}, {two}}), false));
}

TEST(CompareResults, NumericUnificationAndTolerance) {
  EXPECT_TRUE(CellsEqual(Cell{std::int64_t{3}}, Cell{3.0}));
  EXPECT_TRUE(CellsEqual(Cell{1.0 / 3.0}, Cell{0.3333333333}));
  EXPECT_FALSE(CellsEqual(Cell{1.0}, Cell{1.00001}));
  EXPECT_FALSE(CellsEqual(Cell{std::string("1")}, Cell{std::int64_t{1}}));
  EXPECT_TRUE(CellsEqual(Cell{}, Cell{}));
  EXPECT_FALSE(CellsEqual(Cell{}, Cell{0.0}));
}

TEST(CompareResults, ColumnCountMatters) {
  const Cell a{std::int64_t{1}};
  EXPECT_FALSE(CompareResults(Rows({{a}}), Rows({{a, a}}), false));
}

TEST(CompareResults, Symmetric) {
  const std::vector<ExecOutcome> outcomes = {
      Rows({}),
      Rows({{Cell{std::int64_t{1}}}, {Cell{2.0}}}),
      Rows({{Cell{2.0}}, {Cell{std::int64_t{1}}}}),
      Rows({{Cell{std::string("a")}}}),
      Rows({{Cell{1.0000000001}}, {Cell{std::int64_t{2}}}}),
      ExecOutcome::FromError(ErrorKind::kSyntax),
  };
  for (const auto& a : outcomes) {
    for (const auto& b : outcomes) {
      for (bool ordered : {false, true}) {
        EXPECT_EQ(CompareResults(a, b, ordered), CompareResults(b, a, ordered));
      }
    }
  }
}

TEST_F(ExecFixture, SelfMatchIsFull) {
  auto pairs = FixturePairs();
  for (auto& p : pairs) p.pred_sql = p.gold_sql;
  const EXReport r = ExecutionAccuracy(pairs, *root_);
  EXPECT_EQ(r.n, 20u);
  EXPECT_EQ(r.matches, 20u);
  EXPECT_EQ(r.overall_accuracy, 100.0);
}

TEST_F(ExecFixture, FixtureSuiteMatchesOracleVerdicts) {
  const auto pairs = FixturePairs();
  const auto expected =
      ReadJsonFile(DataDir() / "exec_fixture" / "expected_verdicts.json");
  const EXReport r = ExecutionAccuracy(pairs, *root_);
  ASSERT_EQ(r.per_pair.size(), 20u);
  for (std::size_t i = 0; i < r.per_pair.size(); ++i) {
    const auto& want = expected.at("verdicts")[i];
    EXPECT_EQ(r.per_pair[i].id, want.at("id").get<std::string>());
    EXPECT_EQ(r.per_pair[i].matched, want.at("match").get<bool>())
        << r.per_pair[i].id << ": " << r.per_pair[i].reason;
  }
  EXPECT_EQ(r.overall_accuracy, expected.at("accuracy").get<double>());
  EXPECT_EQ(r.overall_accuracy, 70.0);
  std::size_t tier_matches = 0, tier_n = 0;
  for (const auto& t : r.per_tier) {
    tier_matches += t.matches;
    tier_n += t.n;
  }
  EXPECT_EQ(tier_matches, r.matches);
  EXPECT_EQ(tier_n, r.n);
}

TEST_F(ExecFixture, ParallelReportIsByteIdentical) {
  const auto pairs = FixturePairs();
  EvalOptions serial;
  serial.workers = 1;
  EvalOptions parallel;
  parallel.workers = 8;
  EXPECT_EQ(ExecutionAccuracy(pairs, *root_, serial).ToJson().dump(),
            ExecutionAccuracy(pairs, *root_, parallel).ToJson().dump());
}

TEST_F(ExecFixture, MissingDatabaseFailsOnlyAffectedPairs) {
  auto pairs = FixturePairs();
  pairs[0].db_id = "ghost";
  pairs[1].pred_sql.reset();
  const EXReport r = ExecutionAccuracy(pairs, *root_);
  EXPECT_FALSE(r.per_pair[0].matched);
  EXPECT_FALSE(r.per_pair[0].reason.empty());
  EXPECT_FALSE(r.per_pair[1].matched);
  EXPECT_TRUE(r.per_pair[2].matched);
}

TEST(ExecutionAccuracy, EmptyPairList) {
  const EXReport r = ExecutionAccuracy({}, fs::path("/nonexistent"));
  EXPECT_EQ(r.n, 0u);
  EXPECT_EQ(r.overall_accuracy, 0.0);
  EXPECT_TRUE(r.empty_warning);
  EXPECT_TRUE(r.ToJson().at("empty_warning").get<bool>());
}

TEST_F(ExecFixture, TierMatrixShape) {
  const auto pairs = FixturePairs();
  const EXReport report = ExecutionAccuracy(pairs, *root_);
  std::vector<std::pair<std::string, EXReport>> reports;
  for (int a = 1; a <= 4; ++a) {
    reports.emplace_back("{" + std::to_string(a) + "}", report);
  }
  const std::string csv = TierMatrixCsv(reports);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < csv.size()) {
    const std::size_t end = csv.find('\n', start);
    lines.push_back(csv.substr(start, end - start));
    start = end + 1;
  }
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "composition,EASY,MEDIUM,HARD,EXTRA");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i].substr(lines[i].find(',')),
              lines[1].substr(lines[1].find(',')));
  }
}

TEST_F(ExecFixture, TierMatrixRejectsDifferentPairSets) {
  auto pairs = FixturePairs();
  const EXReport full = ExecutionAccuracy(pairs, *root_);
  pairs.pop_back();
  const EXReport partial = ExecutionAccuracy(pairs, *root_);
  const std::vector<std::pair<std::string, EXReport>> reports = {
      {"{1}", full}, {"{2}", partial}};
  try {
    TierMatrixCsv(reports);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentPairSets);
  }
}

TEST(Predictions, ReadAndJoin) {
  const fs::path file = legoforge::testing::MakeTempDir("pred") / "p.jsonl";
  std::ofstream(file) << R"({"id": "a", "pred_sql": "SELECT 1"})" << '\n'
                      << R"({"id": "b", "pred_sql": "SELECT 2"})" << '\n';
  const auto preds = ReadPredictions(file);
  ASSERT_EQ(preds.size(), 2u);
  SbclRecord ga;
  ga.id = "a";
  ga.sql = "SELECT 1";
  ga.tier = Tier::kHard;
  SbclRecord gc = ga;
  gc.id = "c";
  const std::vector<SbclRecord> gold = {ga, gc};
  const auto pairs = JoinPredictions(gold, preds);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].pred_sql, "SELECT 1");
  EXPECT_EQ(pairs[0].tier, Tier::kHard);
  EXPECT_FALSE(pairs[1].pred_sql.has_value());
  EXPECT_THROW(ReadPredictions(file.parent_path() / "none.jsonl"), Error);
}

}  // namespace
}  // namespace legoforge::eval
