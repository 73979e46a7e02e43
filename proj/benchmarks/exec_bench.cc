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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>
#include <sqlite3.h>

#include "legoforge/exec_eval.hpp"

namespace {

namespace fs = std::filesystem;
namespace eval = legoforge::eval;

fs::path FixtureRoot() {
  static const fs::path root = [] {
    const fs::path dir =
        fs::temp_directory_path() / "lego-forge-bench" / "company";
    fs::create_directories(dir);
    const fs::path db = dir / "company.sqlite";
    fs::remove(db);
    std::ifstream in(fs::path(LEGOFORGE_BENCH_DATA_DIR) / "exec_fixture" /
                     "company.sql");
    std::stringstream script;
    script << in.rdbuf();
    sqlite3* handle = nullptr;
    if (sqlite3_open(db.c_str(), &handle) != SQLITE_OK ||
        sqlite3_exec(handle, script.str().c_str(), nullptr, nullptr,
                     nullptr) != SQLITE_OK) {
      sqlite3_close(handle);
      throw std::runtime_error("cannot build " + db.string());
    }
    sqlite3_close(handle);
    return dir.parent_path();
  }();
  return root;
}

void BM_ExecuteQuery(benchmark::State& state) {
  const fs::path db = eval::DatabasePath(FixtureRoot(), "company");
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval::ExecuteQuery(
        db,
        "SELECT d.name, count(*) FROM employee AS e JOIN dept AS d ON "
        "e.dept_id = d.dept_id GROUP BY d.name"));
  }
}
BENCHMARK(BM_ExecuteQuery)->Unit(benchmark::kMicrosecond);

void BM_ExecutionAccuracy(benchmark::State& state) {
  std::vector<eval::EvalPair> pairs;
  for (int i = 0; i < 64; ++i) {
    pairs.push_back(eval::EvalPair{
        "b:" + std::to_string(i), "company",
        "SELECT name, salary FROM employee WHERE salary > " +
            std::to_string(i * 1000),
        "SELECT name, salary FROM employee WHERE salary >= " +
            std::to_string(i * 1000 + 1),
        static_cast<legoforge::Tier>(i % 4)});
  }
  eval::EvalOptions options;
  options.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        eval::ExecutionAccuracy(pairs, FixtureRoot(), options));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_ExecutionAccuracy)
    ->Arg(1)
    ->Arg(4)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace
