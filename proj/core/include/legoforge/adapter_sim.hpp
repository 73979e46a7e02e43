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

#ifndef LEGOFORGE_ADAPTER_SIM_HPP_
#define LEGOFORGE_ADAPTER_SIM_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "legoforge/curriculum.hpp"

namespace legoforge::sim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using curriculum::AdapterComposition;

// Low-rank weight delta B * A. A is rank x d_in, B is d_out x rank.
struct Adapter {
  std::string name;
  Matrix a;
  Matrix b;
  int rank = 0;
  bool trainable = true;

  int parameter_count() const { return static_cast<int>(a.size() + b.size()); }
  Matrix Delta() const { return b * a; }
};

// A single affine map y = W x + b with stackable low-rank adapters. Inputs
// are column vectors; batches are matrices with one sample per column.
class ToyModel {
 public:
  // W and b uniform in [-0.5, 0.5] from `seed`. Throws Error(kInvalidDims).
  static ToyModel Init(int d_in, int d_out, std::uint64_t seed);

  int d_in() const { return static_cast<int>(weight_.cols()); }
  int d_out() const { return static_cast<int>(weight_.rows()); }
  std::uint64_t rng_seed() const { return rng_seed_; }
  const Matrix& weight() const { return weight_; }
  const Vector& bias() const { return bias_; }
  const std::vector<Adapter>& adapters() const { return adapters_; }

  // Attaches an adapter with A uniform in [-0.5, 0.5] and B = 0, so outputs
  // are unchanged. Returns its 1-based index. Throws Error(kRankTooLarge),
  // Error(kDuplicateName) or Error(kInvalidDims) for rank < 1.
  int AttachAdapter(std::string name, int rank, std::uint64_t seed);

  // 1-based index of the named adapter; throws Error(kUnknownAdapter).
  int IndexOf(std::string_view name) const;
  const Adapter& adapter(int index) const;
  Adapter& mutable_adapter(int index);

  // W + sum of enabled deltas, summed in ascending index order. Throws
  // Error(kUnknownAdapter) for indices that are not attached.
  Matrix EffectiveWeight(const AdapterComposition& composition) const;
  Vector Forward(const AdapterComposition& composition, const Vector& x) const;
  Matrix ForwardBatch(const AdapterComposition& composition,
                      const Matrix& x) const;

  // 16-hex-digit FNV-1a digest of a component's parameter bytes. `name` is
  // "base" or an adapter name.
  std::string ComponentDigest(std::string_view name) const;
  std::map<std::string, std::string> AllDigests() const;

 private:
  Matrix weight_;
  Vector bias_;
  std::vector<Adapter> adapters_;
  std::uint64_t rng_seed_ = 0;
};

// Mean squared error over all samples and outputs.
double Loss(const ToyModel& model, const AdapterComposition& composition,
            const Matrix& x, const Matrix& y);

struct AdapterGradient {
  Matrix d_a;
  Matrix d_b;
};

// Exact gradient of Loss with respect to one adapter's A and B.
AdapterGradient ComputeAdapterGradient(const ToyModel& model,
                                       const AdapterComposition& composition,
                                       std::string_view adapter_name,
                                       const Matrix& x, const Matrix& y);

// Compares ComputeAdapterGradient against central differences of Loss and
// returns the largest relative error over every entry of the adapter.
// Throws Error(kInvalidArgument) unless eps is in [1e-7, 1e-3].
double FiniteDiffCheck(const ToyModel& model,
                       const AdapterComposition& composition,
                       std::string_view adapter_name, const Matrix& x,
                       const Matrix& y, double eps);

struct StageSpec {
  int stage_index = 1;
  std::string train_adapter;
  std::vector<std::string> frozen;
  // Fold frozen adapter deltas into a working copy of W for the forward
  // pass instead of evaluating them separately.
  bool merge_frozen = false;

  static StageSpec FromManifest(const curriculum::StageManifest& manifest);
};

struct StageReport {
  int stage_index = 0;
  int steps = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  // Digest of every frozen component before and after the stage.
  std::map<std::string, std::pair<std::string, std::string>> frozen_checksums;

  bool FrozenIntact() const;
};

// Plain gradient descent on the named adapter with every frozen adapter
// active in the forward pass. Throws Error(kFrozenTargetError) when the
// trained adapter is listed as frozen, Error(kInvalidArgument) when "base"
// is not frozen, Error(kUnknownAdapter) and Error(kNonFiniteLoss).
StageReport TrainStage(ToyModel& model, const StageSpec& spec,
                       const Matrix& x, const Matrix& y, int steps, double lr);

struct TierData {
  Matrix x_train;
  Matrix y_train;
  Matrix x_eval;
  Matrix y_eval;
};

struct SimConfig {
  int d_in = 8;
  int d_out = 4;
  int rank = 2;
  int steps = 500;
  double lr = 0.1;
  std::uint64_t seed = 0;
  int n_train = 256;
  int n_eval = 256;
  double noise = 0.01;
  // Deviation of tier t's target map from the base weight.
  std::array<double, 4> perturbation = {0.1, 0.3, 0.6, 1.0};
  bool merge_frozen = false;
};

// Tier t: x uniform in [-1, 1]^d_in, y = (W + s_t P_t) x + b + noise with a
// seeded perturbation P_t whose entries are uniform in [-1, 1].
std::array<TierData, 4> MakeTierData(const ToyModel& base,
                                     const SimConfig& config);

struct SimReport {
  SimConfig config;
  std::vector<StageReport> stages;
  // Row i: composition {i+1}; column t: held-out loss on tier t.
  Matrix singleton_eval;
  // Held-out loss per tier for {} and for {1,2,3,4}.
  Vector base_eval;
  Vector full_stack_eval;

  nlohmann::ordered_json ToJson() const;
};

// Four-stage sequential training following the multi-adapter freeze
// protocol, followed by per-tier evaluation of each composition.
SimReport RunCurriculumSim(const SimConfig& config);

}  // namespace legoforge::sim

#endif  // LEGOFORGE_ADAPTER_SIM_HPP_
