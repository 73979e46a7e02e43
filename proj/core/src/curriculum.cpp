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

#include "legoforge/curriculum.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "legoforge/error.hpp"

namespace legoforge::curriculum {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kHeaderFile = "plan.json";

std::string StageFileName(int stage_index) {
  return "stage_" + std::to_string(stage_index) + ".json";
}

void RequireNonEmpty(std::span<const SbclRecord> dataset) {
  if (dataset.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "cannot plan over an empty dataset");
  }
}

std::vector<std::string> Ids(std::span<const SbclRecord> records) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.id);
  return ids;
}

// Uniform integer in [0, bound) by rejection, so the draw sequence depends
// only on the engine.
std::uint64_t Bounded(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t r = gen();
    if (r < limit) return r % bound;
  }
}

void WriteJson(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

void WriteIdList(const fs::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kLoraShuffled: return "lora";
    case Strategy::kSingleStageCl: return "single-cl";
    case Strategy::kMultiAdapterCl: return "multi-cl";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::kLoraShuffled, Strategy::kSingleStageCl,
                     Strategy::kMultiAdapterCl}) {
    if (StrategyName(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown strategy '" + std::string(name) + "'");
}

std::string AdapterName(int index) {
  return "adapter_" + std::to_string(index);
}

std::size_t StageManifest::pass_length() const {
  return epochs > 0 ? example_ids.size() / static_cast<std::size_t>(epochs)
                    : 0;
}

std::span<const std::string> StageManifest::pass(int epoch) const {
  const std::size_t len = pass_length();
  return std::span<const std::string>(example_ids)
      .subspan(static_cast<std::size_t>(epoch) * len, len);
}

void SeededShuffle(std::vector<std::string>& items, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(Bounded(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

TrainingPlan PlanLora(std::span<const SbclRecord> dataset, int epochs,
                      std::uint64_t seed) {
  RequireNonEmpty(dataset);
  if (epochs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  }
  const std::vector<std::string> ids = Ids(dataset);
  StageManifest stage;
  stage.stage_index = 1;
  stage.train_adapter = AdapterName(1);
  stage.frozen = {std::string(kBaseComponent)};
  stage.epochs = epochs;
  stage.example_ids.reserve(ids.size() * static_cast<std::size_t>(epochs));
  for (int e = 0; e < epochs; ++e) {
    std::vector<std::string> pass = ids;
    SeededShuffle(pass, seed + static_cast<std::uint64_t>(e));
    stage.example_ids.insert(stage.example_ids.end(), pass.begin(), pass.end());
  }
  return TrainingPlan{Strategy::kLoraShuffled, {std::move(stage)}, seed};
}

TrainingPlan PlanSingleStage(std::span<const SbclRecord> dataset) {
  RequireNonEmpty(dataset);
  for (std::size_t i = 1; i < dataset.size(); ++i) {
    if (dataset[i].score.total < dataset[i - 1].score.total) {
      throw Error(ErrorCode::kInvalidArgument,
                  "dataset is not in SB-CL order at index " +
                      std::to_string(i));
    }
  }
  StageManifest stage;
  stage.stage_index = 1;
  stage.train_adapter = AdapterName(1);
  stage.frozen = {std::string(kBaseComponent)};
  stage.epochs = 1;
  stage.example_ids = Ids(dataset);
  return TrainingPlan{Strategy::kSingleStageCl, {std::move(stage)}, 0};
}

TrainingPlan PlanMultiAdapter(std::span<const SbclRecord> dataset,
                              int epochs_per_stage) {
  if (epochs_per_stage < 1) {
    throw Error(ErrorCode::kInvalidArgument, "epochs_per_stage must be >= 1");
  }
  TrainingPlan plan{Strategy::kMultiAdapterCl, {}, 0};
  std::vector<std::string> frozen = {std::string(kBaseComponent)};
  for (Tier tier : kAllTiers) {
    const int s = static_cast<int>(tier) + 1;
    std::vector<std::string> ids;
    for (const auto& r : dataset) {
      if (r.tier == tier) ids.push_back(r.id);
    }
    if (ids.empty()) {
      throw Error(ErrorCode::kMissingTier,
                  std::string(TierName(tier)) + " has no examples");
    }
    StageManifest stage;
    stage.stage_index = s;
    stage.train_adapter = AdapterName(s);
    stage.frozen = frozen;
    stage.tier = tier;
    stage.epochs = epochs_per_stage;
    for (int e = 0; e < epochs_per_stage; ++e) {
      stage.example_ids.insert(stage.example_ids.end(), ids.begin(), ids.end());
    }
    plan.stages.push_back(std::move(stage));
    frozen.push_back(AdapterName(s));
  }
  return plan;
}

std::vector<fs::path> EmitManifests(const TrainingPlan& plan,
                                    const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }
  std::vector<fs::path> written;
  const fs::path header = out_dir / kHeaderFile;
  WriteJson(header, nlohmann::ordered_json{
                        {"schema_version", kManifestSchemaVersion},
                        {"strategy", StrategyName(plan.strategy)},
                        {"seed", plan.seed},
                        {"n_stages", plan.stages.size()},
                    });
  written.push_back(header);
  for (const auto& st : plan.stages) {
    const fs::path path = out_dir / StageFileName(st.stage_index);
    WriteJson(path,
              nlohmann::ordered_json{
                  {"stage_index", st.stage_index},
                  {"train_adapter", st.train_adapter},
                  {"frozen", st.frozen},
                  {"tier", st.tier ? std::string(TierName(*st.tier)) : "ALL"},
                  {"epochs", st.epochs},
                  {"example_ids", st.example_ids},
              });
    WriteIdList(fs::path(path).replace_extension(".ids"), st.example_ids);
    written.push_back(path);
  }
  return written;
}

TrainingPlan LoadManifests(const fs::path& dir) {
  const nlohmann::json header = ReadJson(dir / kHeaderFile);
  try {
    const int version = header.at("schema_version").get<int>();
    if (version != kManifestSchemaVersion) {
      throw Error(ErrorCode::kSchemaVersionMismatch,
                  "manifest schema_version " + std::to_string(version) +
                      ", expected " + std::to_string(kManifestSchemaVersion));
    }
    TrainingPlan plan;
    plan.strategy = ParseStrategy(header.at("strategy").get<std::string>());
    plan.seed = header.at("seed").get<std::uint64_t>();
    const int n = header.at("n_stages").get<int>();
    for (int s = 1; s <= n; ++s) {
      const nlohmann::json j = ReadJson(dir / StageFileName(s));
      StageManifest st;
      st.stage_index = j.at("stage_index").get<int>();
      st.train_adapter = j.at("train_adapter").get<std::string>();
      st.frozen = j.at("frozen").get<std::vector<std::string>>();
      const auto tier = j.at("tier").get<std::string>();
      if (tier != "ALL") st.tier = ParseTier(tier);
      st.epochs = j.at("epochs").get<int>();
      st.example_ids = j.at("example_ids").get<std::vector<std::string>>();
      plan.stages.push_back(std::move(st));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord,
                dir.string() + ": " + e.what());
  }
}

std::vector<std::string> AdapterComposition::names() const {
  std::vector<std::string> out;
  for (int i : enabled) out.push_back(AdapterName(i));
  return out;
}

std::string AdapterComposition::label() const {
  std::string out = "{";
  for (std::size_t i = 0; i < enabled.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(enabled[i]);
  }
  return out + "}";
}

AdapterComposition ComposeAdapters(std::span<const int> selection,
                                   int n_adapters) {
  std::set<int> unique;
  for (int i : selection) {
    if (i < 1 || i > n_adapters) {
      throw Error(ErrorCode::kUnknownAdapter,
                  "adapter index " + std::to_string(i) + " not in [1, " +
                      std::to_string(n_adapters) + "]");
    }
    unique.insert(i);
  }
  return AdapterComposition{std::vector<int>(unique.begin(), unique.end())};
}

std::vector<AdapterComposition> AllCompositions(int n_adapters) {
  std::vector<AdapterComposition> out;
  for (unsigned mask = 0; mask < (1u << n_adapters); ++mask) {
    AdapterComposition c;
    for (int i = 0; i < n_adapters; ++i) {
      if (mask & (1u << i)) c.enabled.push_back(i + 1);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace legoforge::curriculum
