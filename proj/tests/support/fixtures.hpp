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

#ifndef LEGOFORGE_TESTS_SUPPORT_FIXTURES_HPP_
#define LEGOFORGE_TESTS_SUPPORT_FIXTURES_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "legoforge/dataset.hpp"

namespace legoforge::testing {

std::filesystem::path DataDir();

// Fresh empty directory under the system temp dir.
std::filesystem::path MakeTempDir(std::string_view tag);

nlohmann::json ReadJsonFile(const std::filesystem::path& path);

// Executes a SQL script into a new database file at `db_file`.
void BuildDatabase(const std::filesystem::path& script,
                   const std::filesystem::path& db_file);

// Creates <root>/company/company.sqlite from the bundled fixture script and
// returns <root>.
std::filesystem::path BuildFixtureDbRoot(const std::filesystem::path& root);

// N sorted records with strictly increasing totals, tiered by quartile.
// Ids are "syn:<i>".
std::vector<SbclRecord> SyntheticRecords(std::size_t n,
                                         std::uint64_t seed = 1);

}  // namespace legoforge::testing

#endif  // LEGOFORGE_TESTS_SUPPORT_FIXTURES_HPP_
