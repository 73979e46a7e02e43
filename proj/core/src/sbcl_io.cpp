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

#include <fstream>
#include <sstream>

#include "legoforge/dataset.hpp"
#include "legoforge/error.hpp"

namespace legoforge {

nlohmann::ordered_json ToJson(const SbclRecord& r) {
  return nlohmann::ordered_json{
      {"id", r.id},
      {"source", SourceName(r.source)},
      {"split", SplitName(r.split)},
      {"db_id", r.db_id},
      {"question", r.question},
      {"sql", r.sql},
      {"score",
       {{"keyword", r.score.keyword_term},
        {"db", r.score.db_term},
        {"nested", r.score.nested_term},
        {"total", r.score.total}}},
      {"tier", TierName(r.tier)},
  };
}

SbclRecord SbclRecordFromJson(const nlohmann::json& j) {
  SbclRecord r;
  r.id = j.at("id").get<std::string>();
  r.source = ParseSource(j.at("source").get<std::string>());
  r.split = ParseSplit(j.at("split").get<std::string>());
  r.db_id = j.at("db_id").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.sql = j.at("sql").get<std::string>();
  const auto& s = j.at("score");
  r.score.keyword_term = s.at("keyword").get<double>();
  r.score.db_term = s.at("db").get<double>();
  r.score.nested_term = s.at("nested").get<double>();
  r.score.total = s.at("total").get<double>();
  r.tier = ParseTier(j.at("tier").get<std::string>());
  return r;
}

std::string SerializeSbcl(std::span<const SbclRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += ToJson(r).dump();
    out += '\n';
  }
  return out;
}

void WriteSbcl(const std::filesystem::path& path,
               std::span<const SbclRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << SerializeSbcl(records);
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

std::vector<SbclRecord> ReadSbcl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<SbclRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(SbclRecordFromJson(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.filename().string() + " line " +
                      std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace legoforge
