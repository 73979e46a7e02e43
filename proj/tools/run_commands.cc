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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "legoforge/adapter_sim.hpp"
#include "legoforge/curriculum.hpp"
#include "legoforge/dataset.hpp"
#include "legoforge/error.hpp"
#include "legoforge/exec_eval.hpp"

namespace legoforge::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

struct PlanArgs {
  std::string strategy;
  std::string in;
  std::string out;
  int epochs = 1;
  std::uint64_t seed = 0;
};

int RunPlan(const PlanArgs& args) {
  using namespace curriculum;
  const std::vector<SbclRecord> records = ReadSbcl(args.in);
  TrainingPlan plan;
  switch (ParseStrategy(args.strategy)) {
    case Strategy::kLoraShuffled:
      plan = PlanLora(records, args.epochs, args.seed);
      break;
    case Strategy::kSingleStageCl:
      if (args.epochs != 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "single-cl makes exactly one pass; use --epochs 1");
      }
      plan = PlanSingleStage(records);
      plan.seed = args.seed;
      break;
    case Strategy::kMultiAdapterCl:
      plan = PlanMultiAdapter(records, args.epochs);
      plan.seed = args.seed;
      break;
  }
  for (const auto& path : EmitManifests(plan, args.out)) {
    std::cout << path.string() << '\n';
  }
  return 0;
}

struct SimArgs {
  sim::SimConfig config;
  std::string out;
};

int RunSimulate(const SimArgs& args) {
  const sim::SimReport report = sim::RunCurriculumSim(args.config);
  WriteText(args.out, report.ToJson().dump(2) + "\n");

  std::printf("%-8s %12s %12s %8s\n", "stage", "initial", "final", "frozen");
  for (const auto& s : report.stages) {
    std::printf("%-8d %12.6f %12.6f %8s\n", s.stage_index, s.initial_loss,
                s.final_loss, s.FrozenIntact() ? "intact" : "CHANGED");
  }
  std::printf("\nheld-out loss  %10s %10s %10s %10s\n", "EASY", "MEDIUM",
              "HARD", "EXTRA");
  std::printf("%-14s", "{}");
  for (int t = 0; t < 4; ++t) std::printf(" %10.6f", report.base_eval(t));
  std::printf("\n");
  for (int a = 0; a < 4; ++a) {
    std::printf("{%d}%11s", a + 1, "");
    for (int t = 0; t < 4; ++t) {
      std::printf(" %10.6f", report.singleton_eval(a, t));
    }
    std::printf("\n");
  }
  std::printf("%-14s", "{1,2,3,4}");
  for (int t = 0; t < 4; ++t) std::printf(" %10.6f", report.full_stack_eval(t));
  std::printf("\n");
  return 0;
}

struct EvalArgs {
  std::vector<std::string> preds;
  std::string gold;
  std::string db_root;
  std::string out;
  std::string matrix;
  int timeout_ms = eval::kDefaultTimeoutMs;
  int workers = 1;
};

// "label=path" or a bare path, labelled by its file stem.
std::pair<std::string, fs::path> SplitLabel(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq != std::string::npos && eq > 0) {
    return {spec.substr(0, eq), fs::path(spec.substr(eq + 1))};
  }
  const fs::path p(spec);
  return {p.stem().string(), p};
}

int RunEval(const EvalArgs& args) {
  const std::vector<SbclRecord> gold = ReadSbcl(args.gold);
  eval::EvalOptions options;
  options.timeout_ms = args.timeout_ms;
  options.workers = args.workers;

  std::vector<std::pair<std::string, eval::EXReport>> reports;
  for (const auto& spec : args.preds) {
    auto [label, path] = SplitLabel(spec);
    const auto pairs =
        eval::JoinPredictions(gold, eval::ReadPredictions(path));
    reports.emplace_back(label,
                         eval::ExecutionAccuracy(pairs, args.db_root, options));
    const auto& r = reports.back().second;
    std::fprintf(stderr, "%s: %zu/%zu = %.2f%%\n", label.c_str(), r.matches,
                 r.n, r.overall_accuracy);
  }

  std::string report_text;
  if (reports.size() == 1) {
    report_text = reports.front().second.ToJson().dump(2) + "\n";
  } else {
    ordered_json all = ordered_json::object();
    for (const auto& [label, r] : reports) all[label] = r.ToJson();
    report_text = all.dump(2) + "\n";
  }
  if (args.out.empty()) {
    std::cout << report_text;
  } else {
    WriteText(args.out, report_text);
  }
  if (reports.size() > 1 || !args.matrix.empty()) {
    const std::string csv = eval::TierMatrixCsv(reports);
    if (args.matrix.empty()) {
      std::cerr << csv;
    } else {
      WriteText(args.matrix, csv);
    }
  }
  return 0;
}

}  // namespace

void AddPlanCommand(CLI::App& app, Runner& run) {
  auto args = std::make_shared<PlanArgs>();
  CLI::App* cmd =
      app.add_subcommand("plan", "Emit training-stage manifests for a strategy");
  cmd->add_option("--strategy", args->strategy, "Training strategy")
      ->required()
      ->check(CLI::IsMember({"lora", "single-cl", "multi-cl"}));
  cmd->add_option("--in", args->in, "SB-CL JSON Lines file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--epochs", args->epochs,
                  "Epochs (lora) or epochs per stage (multi-cl)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args->seed, "Shuffle seed");
  cmd->add_option("--out", args->out, "Manifest directory")->required();
  cmd->callback([args, &run] { run = [args] { return RunPlan(*args); }; });
}

void AddSimulateCommand(CLI::App& app, Runner& run) {
  auto args = std::make_shared<SimArgs>();
  sim::SimConfig& c = args->config;
  CLI::App* cmd = app.add_subcommand(
      "simulate", "Run the four-stage adapter curriculum on a toy model");
  cmd->add_option("--d-in", c.d_in, "Input dimension")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--d-out", c.d_out, "Output dimension")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rank", c.rank, "Adapter rank")->check(CLI::PositiveNumber);
  cmd->add_option("--steps", c.steps, "Gradient steps per stage")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--lr", c.lr, "Learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Seed");
  cmd->add_option("--n-train", c.n_train, "Training samples per tier")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--n-eval", c.n_eval, "Held-out samples per tier")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--noise", c.noise, "Target noise amplitude")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--merge-frozen", c.merge_frozen,
                "Fold frozen adapters into the base for the forward pass");
  cmd->add_option("--out", args->out, "Report JSON path")->required();
  cmd->callback(
      [args, &run] { run = [args] { return RunSimulate(*args); }; });
}

void AddEvalCommand(CLI::App& app, Runner& run) {
  auto args = std::make_shared<EvalArgs>();
  CLI::App* cmd =
      app.add_subcommand("eval", "Execution accuracy of predicted SQL");
  cmd->add_option("--pred", args->preds,
                  "Predictions JSONL ({id, pred_sql}); repeat as label=path "
                  "to compare compositions")
      ->required();
  cmd->add_option("--gold", args->gold, "SB-CL JSON Lines file with gold SQL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--db-root", args->db_root,
                  "Directory holding <db_id>/<db_id>.sqlite")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--timeout-ms", args->timeout_ms, "Per-query timeout")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", args->workers, "Parallel workers")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", args->out, "Report JSON path (default stdout)");
  cmd->add_option("--matrix", args->matrix,
                  "Tier matrix CSV path (default stderr when several --pred)");
  cmd->callback([args, &run] { run = [args] { return RunEval(*args); }; });
}

}  // namespace legoforge::cli
