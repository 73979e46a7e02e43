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

#include "legoforge/adapter_sim.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace legoforge::sim {
namespace {

AdapterComposition Comp(std::vector<int> enabled) {
  return AdapterComposition{std::move(enabled)};
}

Matrix RandomMatrix(int rows, int cols, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  }
  return m;
}

// Model with `n` adapters whose B factors are non-zero.
ToyModel ModelWithAdapters(int n, std::uint64_t seed, int d_in = 8,
                           int d_out = 4, int rank = 2) {
  ToyModel m = ToyModel::Init(d_in, d_out, seed);
  std::mt19937_64 rng(seed + 1000);
  for (int i = 1; i <= n; ++i) {
    const int idx = m.AttachAdapter("adapter_" + std::to_string(i), rank,
                                    seed + static_cast<std::uint64_t>(i));
    m.mutable_adapter(idx).b = RandomMatrix(d_out, rank, rng, 0.5);
  }
  return m;
}

TEST(ToyModelInit, DeterministicAndShaped) {
  const ToyModel a = ToyModel::Init(4, 2, 7);
  const ToyModel b = ToyModel::Init(4, 2, 7);
  EXPECT_EQ(a.weight(), b.weight());
  EXPECT_EQ(a.bias(), b.bias());
  EXPECT_EQ(a.weight().rows(), 2);
  EXPECT_EQ(a.weight().cols(), 4);
  EXPECT_LE(a.weight().cwiseAbs().maxCoeff(), 0.5);
  const ToyModel c = ToyModel::Init(4, 2, 8);
  EXPECT_NE(a.weight(), c.weight());
  EXPECT_THROW(ToyModel::Init(0, 2, 1), Error);
}

TEST(AttachAdapter, ZeroInitIdentity) {
  ToyModel m = ToyModel::Init(8, 4, 3);
  std::mt19937_64 rng(1);
  const Matrix x = RandomMatrix(8, 20, rng, 1.0);
  const Matrix before = m.ForwardBatch(Comp({}), x);
  m.AttachAdapter("adapter_1", 2, 11);
  m.AttachAdapter("adapter_2", 3, 12);
  for (const auto& c : {Comp({}), Comp({1}), Comp({2}), Comp({1, 2})}) {
    EXPECT_EQ(m.ForwardBatch(c, x), before);
  }
  EXPECT_TRUE(m.adapter(1).b.isZero(0.0));
  EXPECT_EQ(m.adapter(2).parameter_count(), 3 * (8 + 4));
}

TEST(AttachAdapter, Errors) {
  ToyModel m = ToyModel::Init(8, 4, 3);
  try {
    m.AttachAdapter("adapter_1", 5, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankTooLarge);
  }
  m.AttachAdapter("adapter_1", 4, 1);
  try {
    m.AttachAdapter("adapter_1", 1, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateName);
  }
  EXPECT_THROW(m.AttachAdapter("base", 1, 1), Error);
  EXPECT_THROW(m.Forward(Comp({2}), Vector::Zero(8)), Error);
}

TEST(Forward, BaseOnly) {
  const ToyModel m = ModelWithAdapters(2, 5);
  const Vector x = Vector::LinSpaced(8, -1.0, 1.0);
  const Vector want = m.weight() * x + m.bias();
  EXPECT_TRUE(m.Forward(Comp({}), x).isApprox(want, 1e-15));
}

TEST(Forward, CompositionIsAdditive) {
  const ToyModel m = ModelWithAdapters(4, 6);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = RandomMatrix(8, 1, rng, 1.0).col(0);
    const Vector base = m.Forward(Comp({}), x);
    const Vector d1 = m.Forward(Comp({1}), x) - base;
    const Vector d2 = m.Forward(Comp({2}), x) - base;
    const Vector d12 = m.Forward(Comp({1, 2}), x) - base;
    EXPECT_LE((d12 - (d1 + d2)).cwiseAbs().maxCoeff(), 1e-12);
    Vector sum = Vector::Zero(4);
    for (int a = 1; a <= 4; ++a) sum += m.Forward(Comp({a}), x) - base;
    const Vector all = m.Forward(Comp({1, 2, 3, 4}), x) - base;
    EXPECT_LE((all - sum).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, OrderIndependent) {
  const ToyModel m = ModelWithAdapters(3, 9);
  EXPECT_EQ(m.EffectiveWeight(Comp({3, 1, 2})),
            m.EffectiveWeight(Comp({1, 2, 3})));
}

TEST(Digest, TracksParameterBytes) {
  ToyModel m = ModelWithAdapters(2, 4);
  const std::string before = m.ComponentDigest("adapter_1");
  EXPECT_EQ(before.size(), 16u);
  EXPECT_EQ(before, m.ComponentDigest("adapter_1"));
  m.mutable_adapter(1).a(0, 0) += 1e-12;
  EXPECT_NE(before, m.ComponentDigest("adapter_1"));
  EXPECT_EQ(m.AllDigests().size(), 3u);
}

TEST(Gradient, MatchesCentralDifferencesAtFiftyPoints) {
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int point = 0; point < 50; ++point) {
    const ToyModel m = ModelWithAdapters(3, 100 + point);
    const Matrix x = RandomMatrix(8, 16, rng, 1.0);
    const Matrix y = RandomMatrix(4, 16, rng, 1.0);
    const std::string name = "adapter_" + std::to_string(point % 3 + 1);
    worst = std::max(worst, FiniteDiffCheck(m, Comp({1, 2, 3}), name, x, y,
                                            1e-5));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Gradient, DoublingEpsStillPasses) {
  std::mt19937_64 rng(32);
  const ToyModel m = ModelWithAdapters(2, 55);
  const Matrix x = RandomMatrix(8, 16, rng, 1.0);
  const Matrix y = RandomMatrix(4, 16, rng, 1.0);
  EXPECT_LT(FiniteDiffCheck(m, Comp({1, 2}), "adapter_2", x, y, 1e-5), 1e-4);
  EXPECT_LT(FiniteDiffCheck(m, Comp({1, 2}), "adapter_2", x, y, 2e-5), 1e-4);
  EXPECT_THROW(FiniteDiffCheck(m, Comp({1}), "adapter_1", x, y, 1e-2), Error);
}

TEST(Gradient, ZeroAtOptimum) {
  std::mt19937_64 rng(33);
  const ToyModel m = ModelWithAdapters(2, 77);
  const Matrix x = RandomMatrix(8, 16, rng, 1.0);
  const Matrix y = m.ForwardBatch(Comp({1, 2}), x);
  const AdapterGradient g = ComputeAdapterGradient(m, Comp({1, 2}), "adapter_1",
                                                   x, y);
  EXPECT_LT(std::sqrt(g.d_a.squaredNorm() + g.d_b.squaredNorm()), 1e-12);
}

TEST(TrainStage, ReducesLossWithinCapacity) {
  ToyModel m = ToyModel::Init(8, 4, 21);
  m.AttachAdapter("adapter_1", 2, 22);
  std::mt19937_64 rng(23);
  // Target differs from the base by a rank-2 update.
  const Matrix delta =
      RandomMatrix(4, 2, rng, 0.5) * RandomMatrix(2, 8, rng, 0.5);
  const Matrix x = RandomMatrix(8, 64, rng, 1.0);
  const Matrix y = (m.weight() + delta) * x + m.bias().replicate(1, 64);
  StageSpec spec{1, "adapter_1", {"base"}, false};
  const StageReport r = TrainStage(m, spec, x, y, 200, 1e-2);
  EXPECT_EQ(r.steps, 200);
  EXPECT_LT(r.final_loss, r.initial_loss);
  EXPECT_TRUE(r.FrozenIntact());
}

TEST(TrainStage, FreezeContract) {
  ToyModel m = ModelWithAdapters(2, 40);
  std::mt19937_64 rng(41);
  const Matrix x = RandomMatrix(8, 32, rng, 1.0);
  const Matrix y = RandomMatrix(4, 32, rng, 1.0);
  const auto before = m.AllDigests();
  StageSpec spec{2, "adapter_2", {"base", "adapter_1"}, false};
  const StageReport r = TrainStage(m, spec, x, y, 20, 0.05);
  const auto after = m.AllDigests();
  EXPECT_EQ(before.at("base"), after.at("base"));
  EXPECT_EQ(before.at("adapter_1"), after.at("adapter_1"));
  EXPECT_NE(before.at("adapter_2"), after.at("adapter_2"));
  EXPECT_TRUE(r.FrozenIntact());
  EXPECT_EQ(r.frozen_checksums.size(), 2u);
}

TEST(TrainStage, MergedForwardMatchesActiveForward) {
  ToyModel a = ModelWithAdapters(2, 60);
  ToyModel b = a;
  std::mt19937_64 rng(61);
  const Matrix x = RandomMatrix(8, 32, rng, 1.0);
  const Matrix y = RandomMatrix(4, 32, rng, 1.0);
  const StageReport ra =
      TrainStage(a, {2, "adapter_2", {"base", "adapter_1"}, false}, x, y, 30,
                 0.05);
  const StageReport rb =
      TrainStage(b, {2, "adapter_2", {"base", "adapter_1"}, true}, x, y, 30,
                 0.05);
  EXPECT_NEAR(ra.final_loss, rb.final_loss, 1e-12);
  EXPECT_TRUE(rb.FrozenIntact());
}

TEST(TrainStage, Errors) {
  ToyModel m = ModelWithAdapters(2, 50);
  const Matrix x = Matrix::Zero(8, 4);
  const Matrix y = Matrix::Zero(4, 4);
  try {
    TrainStage(m, {1, "adapter_1", {"base", "adapter_1"}, false}, x, y, 1, 0.1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFrozenTargetError);
  }
  EXPECT_THROW(TrainStage(m, {1, "adapter_1", {}, false}, x, y, 1, 0.1), Error);
  EXPECT_THROW(TrainStage(m, {1, "adapter_9", {"base"}, false}, x, y, 1, 0.1),
               Error);
  const Matrix y_big = Matrix::Constant(4, 4, 1e200);
  try {
    TrainStage(m, {1, "adapter_1", {"base"}, false}, x, y_big, 1, 0.1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
  }
}

TEST(StageSpec, FromManifest) {
  curriculum::StageManifest manifest;
  manifest.stage_index = 3;
  manifest.train_adapter = "adapter_3";
  manifest.frozen = {"base", "adapter_1", "adapter_2"};
  const StageSpec spec = StageSpec::FromManifest(manifest);
  EXPECT_EQ(spec.stage_index, 3);
  EXPECT_EQ(spec.train_adapter, "adapter_3");
  EXPECT_EQ(spec.frozen, manifest.frozen);
}

TEST(CurriculumSim, DefaultRunProperties) {
  const SimReport r = RunCurriculumSim(SimConfig{});
  ASSERT_EQ(r.stages.size(), 4u);
  for (const auto& s : r.stages) {
    EXPECT_TRUE(s.FrozenIntact()) << "stage " << s.stage_index;
    EXPECT_LT(s.final_loss, s.initial_loss);
  }
  EXPECT_EQ(r.stages[3].frozen_checksums.size(), 4u);
  ASSERT_EQ(r.singleton_eval.rows(), 4);
  ASSERT_EQ(r.singleton_eval.cols(), 4);
  EXPECT_TRUE(r.singleton_eval.allFinite());
  for (int t = 0; t < 4; ++t) {
    EXPECT_LT(r.singleton_eval(t, t), r.base_eval(t)) << "tier " << t;
  }
}

TEST(CurriculumSim, Deterministic) {
  SimConfig config;
  config.steps = 50;
  config.seed = 3;
  EXPECT_EQ(RunCurriculumSim(config).ToJson().dump(),
            RunCurriculumSim(config).ToJson().dump());
  SimConfig other = config;
  other.seed = 4;
  EXPECT_NE(RunCurriculumSim(config).ToJson().dump(),
            RunCurriculumSim(other).ToJson().dump());
}

}  // namespace
}  // namespace legoforge::sim
