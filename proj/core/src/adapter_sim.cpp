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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>

#include "legoforge/error.hpp"

namespace legoforge::sim {
namespace {

// Relative errors are measured against max(|analytic|, |numeric|, floor).
constexpr double kRelErrorFloor = 1e-6;

double Uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

Matrix UniformMatrix(std::mt19937_64& gen, Eigen::Index rows,
                     Eigen::Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  // Column-major fill order, fixed for reproducibility.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = lo + (hi - lo) * Uniform01(gen);
    }
  }
  return m;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Fnv1a {
 public:
  void Update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001B3ull;
    }
  }
  void Update(const Matrix& m) {
    const std::int64_t dims[2] = {m.rows(), m.cols()};
    Update(dims, sizeof(dims));
    Update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  void Update(const Vector& v) {
    const std::int64_t dims[1] = {v.size()};
    Update(dims, sizeof(dims));
    Update(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
  }
  std::string Hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

bool Enabled(const AdapterComposition& c, int index) {
  return std::find(c.enabled.begin(), c.enabled.end(), index) !=
         c.enabled.end();
}

// Gradient of the mean squared error with respect to the effective weight.
Matrix WeightGradient(const Matrix& effective, const Vector& bias,
                      const Matrix& x, const Matrix& y) {
  const Matrix residual = (effective * x).colwise() + bias - y;
  const double scale = 2.0 / static_cast<double>(residual.size());
  return scale * residual * x.transpose();
}

double MeanSquaredError(const Matrix& effective, const Vector& bias,
                        const Matrix& x, const Matrix& y) {
  const Matrix residual = (effective * x).colwise() + bias - y;
  return residual.squaredNorm() / static_cast<double>(residual.size());
}

void RequireBatch(const ToyModel& model, const Matrix& x, const Matrix& y) {
  if (x.rows() != model.d_in() || y.rows() != model.d_out() ||
      x.cols() != y.cols() || x.cols() == 0) {
    throw Error(ErrorCode::kInvalidDims, "batch shape does not match model");
  }
}

}  // namespace

ToyModel ToyModel::Init(int d_in, int d_out, std::uint64_t seed) {
  if (d_in < 1 || d_out < 1) {
    throw Error(ErrorCode::kInvalidDims,
                "dims must be >= 1, got d_in=" + std::to_string(d_in) +
                    " d_out=" + std::to_string(d_out));
  }
  std::mt19937_64 gen(seed);
  ToyModel m;
  m.rng_seed_ = seed;
  m.weight_ = UniformMatrix(gen, d_out, d_in, -0.5, 0.5);
  m.bias_ = UniformMatrix(gen, d_out, 1, -0.5, 0.5);
  return m;
}

int ToyModel::AttachAdapter(std::string name, int rank, std::uint64_t seed) {
  if (rank < 1) {
    throw Error(ErrorCode::kInvalidDims, "adapter rank must be >= 1");
  }
  if (rank > std::min(d_in(), d_out())) {
    throw Error(ErrorCode::kRankTooLarge,
                "rank " + std::to_string(rank) + " > min(d_in, d_out) = " +
                    std::to_string(std::min(d_in(), d_out())));
  }
  if (name == curriculum::kBaseComponent) {
    throw Error(ErrorCode::kDuplicateName, "'base' is reserved");
  }
  for (const auto& a : adapters_) {
    if (a.name == name) throw Error(ErrorCode::kDuplicateName, name);
  }
  std::mt19937_64 gen(seed);
  Adapter a;
  a.name = std::move(name);
  a.rank = rank;
  a.a = UniformMatrix(gen, rank, d_in(), -0.5, 0.5);
  a.b = Matrix::Zero(d_out(), rank);
  adapters_.push_back(std::move(a));
  return static_cast<int>(adapters_.size());
}

int ToyModel::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < adapters_.size(); ++i) {
    if (adapters_[i].name == name) return static_cast<int>(i) + 1;
  }
  throw Error(ErrorCode::kUnknownAdapter, std::string(name));
}

const Adapter& ToyModel::adapter(int index) const {
  if (index < 1 || index > static_cast<int>(adapters_.size())) {
    throw Error(ErrorCode::kUnknownAdapter,
                "no adapter at index " + std::to_string(index));
  }
  return adapters_[static_cast<std::size_t>(index - 1)];
}

Adapter& ToyModel::mutable_adapter(int index) {
  return const_cast<Adapter&>(std::as_const(*this).adapter(index));
}

Matrix ToyModel::EffectiveWeight(const AdapterComposition& composition) const {
  std::vector<int> order = composition.enabled;
  std::sort(order.begin(), order.end());
  Matrix w = weight_;
  for (int i : order) w += adapter(i).Delta();
  return w;
}

Vector ToyModel::Forward(const AdapterComposition& composition,
                         const Vector& x) const {
  return EffectiveWeight(composition) * x + bias_;
}

Matrix ToyModel::ForwardBatch(const AdapterComposition& composition,
                              const Matrix& x) const {
  return (EffectiveWeight(composition) * x).colwise() + bias_;
}

std::string ToyModel::ComponentDigest(std::string_view name) const {
  Fnv1a h;
  if (name == curriculum::kBaseComponent) {
    h.Update(weight_);
    h.Update(bias_);
  } else {
    const Adapter& a = adapter(IndexOf(name));
    h.Update(a.a);
    h.Update(a.b);
  }
  return h.Hex();
}

std::map<std::string, std::string> ToyModel::AllDigests() const {
  std::map<std::string, std::string> out;
  out.emplace(std::string(curriculum::kBaseComponent),
              ComponentDigest(curriculum::kBaseComponent));
  for (const auto& a : adapters_) out.emplace(a.name, ComponentDigest(a.name));
  return out;
}

double Loss(const ToyModel& model, const AdapterComposition& composition,
            const Matrix& x, const Matrix& y) {
  RequireBatch(model, x, y);
  return MeanSquaredError(model.EffectiveWeight(composition), model.bias(), x,
                          y);
}

AdapterGradient ComputeAdapterGradient(const ToyModel& model,
                                       const AdapterComposition& composition,
                                       std::string_view adapter_name,
                                       const Matrix& x, const Matrix& y) {
  RequireBatch(model, x, y);
  const int index = model.IndexOf(adapter_name);
  const Adapter& a = model.adapter(index);
  if (!Enabled(composition, index)) {
    return {Matrix::Zero(a.a.rows(), a.a.cols()),
            Matrix::Zero(a.b.rows(), a.b.cols())};
  }
  const Matrix g =
      WeightGradient(model.EffectiveWeight(composition), model.bias(), x, y);
  return {a.b.transpose() * g, g * a.a.transpose()};
}

double FiniteDiffCheck(const ToyModel& model,
                       const AdapterComposition& composition,
                       std::string_view adapter_name, const Matrix& x,
                       const Matrix& y, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw Error(ErrorCode::kInvalidArgument, "eps must be in [1e-7, 1e-3]");
  }
  const AdapterGradient analytic =
      ComputeAdapterGradient(model, composition, adapter_name, x, y);
  ToyModel probe = model;
  const int index = probe.IndexOf(adapter_name);
  double worst = 0.0;

  auto check = [&](Matrix Adapter::*field, const Matrix& grad) {
    Matrix& param = probe.mutable_adapter(index).*field;
    for (Eigen::Index k = 0; k < param.size(); ++k) {
      const double saved = param.data()[k];
      param.data()[k] = saved + eps;
      const double plus = Loss(probe, composition, x, y);
      param.data()[k] = saved - eps;
      const double minus = Loss(probe, composition, x, y);
      param.data()[k] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double exact = grad.data()[k];
      const double denom =
          std::max({std::abs(exact), std::abs(numeric), kRelErrorFloor});
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
  };
  check(&Adapter::a, analytic.d_a);
  check(&Adapter::b, analytic.d_b);
  return worst;
}

StageSpec StageSpec::FromManifest(const curriculum::StageManifest& manifest) {
  return StageSpec{manifest.stage_index, manifest.train_adapter,
                   manifest.frozen, false};
}

bool StageReport::FrozenIntact() const {
  return std::all_of(frozen_checksums.begin(), frozen_checksums.end(),
                     [](const auto& kv) {
                       return kv.second.first == kv.second.second;
                     });
}

StageReport TrainStage(ToyModel& model, const StageSpec& spec,
                       const Matrix& x, const Matrix& y, int steps,
                       double lr) {
  RequireBatch(model, x, y);
  if (steps < 0 || !(lr > 0.0) || !std::isfinite(lr)) {
    throw Error(ErrorCode::kInvalidArgument, "steps >= 0 and lr > 0 required");
  }
  const std::set<std::string> frozen(spec.frozen.begin(), spec.frozen.end());
  if (!frozen.contains(std::string(curriculum::kBaseComponent))) {
    throw Error(ErrorCode::kInvalidArgument,
                "stage " + std::to_string(spec.stage_index) +
                    " does not freeze the base");
  }
  if (frozen.contains(spec.train_adapter)) {
    throw Error(ErrorCode::kFrozenTargetError,
                spec.train_adapter + " is listed as frozen");
  }
  const int target = model.IndexOf(spec.train_adapter);

  AdapterComposition active;
  AdapterComposition frozen_only;
  for (const auto& name : frozen) {
    if (name == curriculum::kBaseComponent) continue;
    const int i = model.IndexOf(name);
    active.enabled.push_back(i);
    frozen_only.enabled.push_back(i);
  }
  active.enabled.push_back(target);
  std::sort(active.enabled.begin(), active.enabled.end());
  std::sort(frozen_only.enabled.begin(), frozen_only.enabled.end());

  for (int i = 1; i <= static_cast<int>(model.adapters().size()); ++i) {
    model.mutable_adapter(i).trainable = (i == target);
  }

  StageReport report;
  report.stage_index = spec.stage_index;
  report.steps = steps;
  for (const auto& name : frozen) {
    report.frozen_checksums[name].first = model.ComponentDigest(name);
  }

  // With merge_frozen the frozen deltas are folded once into a copy of W;
  // the stored base weight is never written.
  const Matrix merged = spec.merge_frozen
                            ? model.EffectiveWeight(frozen_only)
                            : Matrix();
  auto effective = [&]() -> Matrix {
    if (spec.merge_frozen) return merged + model.adapter(target).Delta();
    return model.EffectiveWeight(active);
  };
  auto loss_now = [&] {
    const double l = MeanSquaredError(effective(), model.bias(), x, y);
    if (!std::isfinite(l)) {
      throw Error(ErrorCode::kNonFiniteLoss,
                  "stage " + std::to_string(spec.stage_index));
    }
    return l;
  };

  report.initial_loss = loss_now();
  Adapter& trained = model.mutable_adapter(target);
  for (int step = 0; step < steps; ++step) {
    const Matrix g = WeightGradient(effective(), model.bias(), x, y);
    const Matrix d_a = trained.b.transpose() * g;
    const Matrix d_b = g * trained.a.transpose();
    trained.a -= lr * d_a;
    trained.b -= lr * d_b;
    if (!trained.a.allFinite() || !trained.b.allFinite()) {
      throw Error(ErrorCode::kNonFiniteLoss,
                  "stage " + std::to_string(spec.stage_index) + " step " +
                      std::to_string(step));
    }
  }
  report.final_loss = loss_now();

  for (const auto& name : frozen) {
    report.frozen_checksums[name].second = model.ComponentDigest(name);
  }
  return report;
}

std::array<TierData, 4> MakeTierData(const ToyModel& base,
                                     const SimConfig& config) {
  std::array<TierData, 4> out;
  for (std::size_t t = 0; t < 4; ++t) {
    std::mt19937_64 gen(DeriveSeed(config.seed, 100 + t));
    const Matrix perturbation =
        UniformMatrix(gen, base.d_out(), base.d_in(), -1.0, 1.0);
    const Matrix target = base.weight() + config.perturbation[t] * perturbation;
    // Uniform noise with standard deviation `noise`.
    const double half_width = config.noise * std::sqrt(3.0);
    auto draw = [&](int n, Matrix& xs, Matrix& ys) {
      xs = UniformMatrix(gen, base.d_in(), n, -1.0, 1.0);
      ys = (target * xs).colwise() + base.bias();
      ys += UniformMatrix(gen, base.d_out(), n, -half_width, half_width);
    };
    draw(config.n_train, out[t].x_train, out[t].y_train);
    draw(config.n_eval, out[t].x_eval, out[t].y_eval);
  }
  return out;
}

SimReport RunCurriculumSim(const SimConfig& config) {
  SimReport report;
  report.config = config;
  ToyModel model = ToyModel::Init(config.d_in, config.d_out,
                                  DeriveSeed(config.seed, 0));
  for (int s = 1; s <= curriculum::kNumAdapters; ++s) {
    model.AttachAdapter(curriculum::AdapterName(s), config.rank,
                        DeriveSeed(config.seed, static_cast<std::uint64_t>(s)));
  }
  const auto tiers = MakeTierData(model, config);

  std::vector<std::string> frozen = {std::string(curriculum::kBaseComponent)};
  for (int s = 1; s <= curriculum::kNumAdapters; ++s) {
    StageSpec spec{s, curriculum::AdapterName(s), frozen, config.merge_frozen};
    const TierData& data = tiers[static_cast<std::size_t>(s - 1)];
    report.stages.push_back(TrainStage(model, spec, data.x_train, data.y_train,
                                       config.steps, config.lr));
    frozen.push_back(curriculum::AdapterName(s));
  }

  report.singleton_eval.resize(4, 4);
  report.base_eval.resize(4);
  report.full_stack_eval.resize(4);
  const AdapterComposition none;
  const AdapterComposition all{{1, 2, 3, 4}};
  for (int t = 0; t < 4; ++t) {
    const TierData& data = tiers[static_cast<std::size_t>(t)];
    report.base_eval(t) = Loss(model, none, data.x_eval, data.y_eval);
    report.full_stack_eval(t) = Loss(model, all, data.x_eval, data.y_eval);
    for (int a = 0; a < 4; ++a) {
      report.singleton_eval(a, t) =
          Loss(model, AdapterComposition{{a + 1}}, data.x_eval, data.y_eval);
    }
  }
  return report;
}

nlohmann::ordered_json SimReport::ToJson() const {
  nlohmann::ordered_json j;
  j["config"] = {
      {"d_in", config.d_in},       {"d_out", config.d_out},
      {"rank", config.rank},       {"steps", config.steps},
      {"lr", config.lr},           {"seed", config.seed},
      {"n_train", config.n_train}, {"n_eval", config.n_eval},
      {"noise", config.noise},     {"perturbation", config.perturbation},
      {"merge_frozen", config.merge_frozen},
  };
  auto stages_json = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json checks = nlohmann::ordered_json::object();
    for (const auto& [name, digests] : s.frozen_checksums) {
      checks[name] = {{"before", digests.first}, {"after", digests.second}};
    }
    stages_json.push_back({
        {"stage_index", s.stage_index},
        {"train_adapter", curriculum::AdapterName(s.stage_index)},
        {"steps", s.steps},
        {"initial_loss", s.initial_loss},
        {"final_loss", s.final_loss},
        {"frozen_intact", s.FrozenIntact()},
        {"frozen_checksums", checks},
    });
  }
  j["stages"] = stages_json;
  j["tiers"] = {"EASY", "MEDIUM", "HARD", "EXTRA"};
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index a = 0; a < singleton_eval.rows(); ++a) {
    std::vector<double> row(singleton_eval.cols());
    for (Eigen::Index t = 0; t < singleton_eval.cols(); ++t) {
      row[static_cast<std::size_t>(t)] = singleton_eval(a, t);
    }
    rows.push_back({{"composition", "{" + std::to_string(a + 1) + "}"},
                    {"loss", row}});
  }
  j["eval_matrix"] = rows;
  j["base_eval"] = std::vector<double>(base_eval.data(),
                                       base_eval.data() + base_eval.size());
  j["full_stack_eval"] = std::vector<double>(
      full_stack_eval.data(), full_stack_eval.data() + full_stack_eval.size());
  return j;
}

}  // namespace legoforge::sim
