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

#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <sqlite3.h>

namespace legoforge::testing {
namespace fs = std::filesystem;

fs::path DataDir() { return fs::path(LEGOFORGE_TEST_DATA_DIR); }

fs::path MakeTempDir(std::string_view tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  const fs::path dir =
      fs::temp_directory_path() /
      ("legoforge-" + std::string(tag) + "-" + std::to_string(rd()) + "-" +
       std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

void BuildDatabase(const fs::path& script, const fs::path& db_file) {
  std::ifstream in(script);
  if (!in) throw std::runtime_error("cannot open " + script.string());
  std::stringstream buf;
  buf << in.rdbuf();
  fs::create_directories(db_file.parent_path());
  fs::remove(db_file);
  sqlite3* db = nullptr;
  if (sqlite3_open(db_file.string().c_str(), &db) != SQLITE_OK) {
    sqlite3_close(db);
    throw std::runtime_error("cannot create " + db_file.string());
  }
  char* err = nullptr;
  const int rc = sqlite3_exec(db, buf.str().c_str(), nullptr, nullptr, &err);
  std::string message = err != nullptr ? err : "";
  sqlite3_free(err);
  sqlite3_close(db);
  if (rc != SQLITE_OK) throw std::runtime_error("script failed: " + message);
}

fs::path BuildFixtureDbRoot(const fs::path& root) {
  BuildDatabase(DataDir() / "exec_fixture" / "company.sql",
                root / "company" / "company.sqlite");
  return root;
}

std::vector<SbclRecord> SyntheticRecords(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> step(0.01, 0.5);
  std::vector<SbclRecord> out;
  out.reserve(n);
  double total = 0.0;
  const std::size_t base = n / 4;
  const std::size_t extra = n % 4;
  std::size_t tier = 0;
  std::size_t left = base + (extra > 0 ? 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    while (left == 0) {
      ++tier;
      left = base + (tier < extra ? 1 : 0);
    }
    --left;
    total += step(gen);
    SbclRecord r;
    r.id = "syn:" + std::to_string(i);
    r.source = i % 2 == 0 ? Source::kSpider : Source::kBird;
    r.split = Split::kTrain;
    r.db_id = "db" + std::to_string(i % 5);
    r.question = "question " + std::to_string(i);
    r.sql = "SELECT " + std::to_string(i);
    r.score = ComplexityScore{total, 0.0, 0.0, total};
    r.tier = static_cast<Tier>(tier);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace legoforge::testing
