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

#ifndef LEGOFORGE_CURRICULUM_HPP_
#define LEGOFORGE_CURRICULUM_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "legoforge/dataset.hpp"

namespace legoforge::curriculum {

enum class Strategy { kLoraShuffled, kSingleStageCl, kMultiAdapterCl };

// CLI spellings: "lora", "single-cl", "multi-cl".
std::string_view StrategyName(Strategy s);
Strategy ParseStrategy(std::string_view name);

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kNumAdapters = 4;
inline constexpr std::string_view kBaseComponent = "base";

std::string AdapterName(int index);  // 1-based: "adapter_1"

struct StageManifest {
  int stage_index = 1;
  std::string train_adapter;
  // Frozen components in freeze order; always starts with "base".
  std::vector<std::string> frozen;
  // nullopt means the whole dataset ("ALL").
  std::optional<Tier> tier;
  // Full consumption order: `epochs` passes concatenated, each pass a
  // permutation of the stage's ids.
  std::vector<std::string> example_ids;
  int epochs = 1;

  std::size_t pass_length() const;
  std::span<const std::string> pass(int epoch) const;

  friend bool operator==(const StageManifest&, const StageManifest&) = default;
};

struct TrainingPlan {
  Strategy strategy = Strategy::kLoraShuffled;
  std::vector<StageManifest> stages;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainingPlan&, const TrainingPlan&) = default;
};

// Shuffled baseline: one stage, each epoch an independent permutation drawn
// with seed + epoch. Throws Error(kEmptyDataset) / Error(kInvalidArgument).
TrainingPlan PlanLora(std::span<const SbclRecord> dataset, int epochs,
                      std::uint64_t seed);

// One pass in SB-CL order. `dataset` must be nondecreasing in total.
TrainingPlan PlanSingleStage(std::span<const SbclRecord> dataset);

// Four stages EASY..EXTRA; stage s trains adapter_s with the base and
// adapters 1..s-1 frozen. Throws Error(kMissingTier) if a tier is empty.
TrainingPlan PlanMultiAdapter(std::span<const SbclRecord> dataset,
                              int epochs_per_stage = 1);

// Writes plan.json and stage_<s>.json, plus stage_<s>.ids holding the
// stage's consumption order one id per line. Returns the JSON paths (header
// first). Throws Error(kIoError).
std::vector<std::filesystem::path> EmitManifests(
    const TrainingPlan& plan, const std::filesystem::path& out_dir);

// Throws Error(kMissingFile), Error(kMalformedRecord) or
// Error(kSchemaVersionMismatch).
TrainingPlan LoadManifests(const std::filesystem::path& dir);

// Inference-time selection of adapters; indices are 1-based and kept in
// ascending order. Empty means the base model alone.
struct AdapterComposition {
  std::vector<int> enabled;

  std::vector<std::string> names() const;
  std::string label() const;  // "{}", "{1}", "{1,2}", ...

  friend bool operator==(const AdapterComposition&,
                         const AdapterComposition&) = default;
};

// Throws Error(kUnknownAdapter) for indices outside [1, n_adapters].
AdapterComposition ComposeAdapters(std::span<const int> selection,
                                   int n_adapters = kNumAdapters);

// All 2^n subsets in binary-counting order, starting with {}.
std::vector<AdapterComposition> AllCompositions(int n_adapters = kNumAdapters);

// Portable Fisher-Yates over mt19937_64; identical across standard
// libraries for a given seed.
void SeededShuffle(std::vector<std::string>& items, std::uint64_t seed);

}  // namespace legoforge::curriculum

#endif  // LEGOFORGE_CURRICULUM_HPP_
