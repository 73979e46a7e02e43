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
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "legoforge/complexity.hpp"
#include "legoforge/dataset.hpp"
#include "legoforge/error.hpp"
#include "legoforge/sql_analyzer.hpp"

namespace legoforge::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

Corpus LoadCorpus(const std::string& spider, const std::string& bird) {
  if (spider.empty() && bird.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "at least one of --spider / --bird is required");
  }
  Corpus corpus;
  if (!spider.empty()) corpus.Append(LoadSpider(spider));
  if (!bird.empty()) corpus.Append(LoadBird(bird));
  return corpus;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

struct ScoreArgs {
  std::string sql;
  std::string dataset;
  int workers = 0;
};

// Dataset manifest: {"spider": dir, "bird": dir, "db_size": "ddl",
// "splits": ["train", "dev"]}. Relative paths resolve against the manifest.
int RunScoreDataset(const ScoreArgs& args) {
  const fs::path manifest_path(args.dataset);
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kMissingFile, manifest_path.string());
  const json manifest = json::parse(in);
  const fs::path base = manifest_path.parent_path();
  auto dir = [&](const char* key) -> std::string {
    if (!manifest.contains(key)) return {};
    const fs::path p(manifest.at(key).get<std::string>());
    return (p.is_absolute() ? p : base / p).string();
  };
  const Corpus corpus = LoadCorpus(dir("spider"), dir("bird"));

  ScoringOptions options;
  options.workers = args.workers;
  options.db_size_mode =
      ParseDbSizeMode(manifest.value("db_size", std::string("ddl")));
  std::vector<Split> splits;
  for (const auto& s : manifest.value("splits", json::array({"train", "dev"}))) {
    splits.push_back(ParseSplit(s.get<std::string>()));
  }

  // The context is always the merged train corpus, as in `build`.
  std::vector<Example> train;
  for (const auto& e : corpus.examples) {
    if (e.split == Split::kTrain) train.push_back(e);
  }
  const ScoringContext ctx = BuildScoringContext(
      train.empty() ? corpus.examples : train, corpus.schemas,
      options.db_size_mode);

  std::vector<Example> selected;
  for (const auto& e : corpus.examples) {
    for (Split s : splits) {
      if (e.split == s) selected.push_back(e);
    }
  }
  std::vector<ScoringFailure> failures;
  const auto scored =
      ScoreUnderContext(selected, corpus.schemas, ctx, options, &failures);
  for (const auto& s : scored) {
    ordered_json j;
    j["id"] = s.example.id;
    j["keyword_term"] = s.score.keyword_term;
    j["db_term"] = s.score.db_term;
    j["nested_term"] = s.score.nested_term;
    j["total"] = s.score.total;
    j["parse_ok"] = s.parse_ok;
    std::cout << j.dump() << '\n';
  }
  for (const auto& f : failures) {
    std::cerr << "skipped " << f.id << ": " << f.message << '\n';
  }
  return failures.empty() ? 0 : 1;
}

struct BuildArgs {
  std::string spider;
  std::string bird;
  std::string db_size = "ddl";
  std::string dev_tiering = "train-bounds";
  std::string out;
  int workers = 0;
};

int RunBuild(const BuildArgs& args) {
  const Corpus corpus = LoadCorpus(args.spider, args.bird);
  SbclBuildOptions options;
  options.scoring.db_size_mode = ParseDbSizeMode(args.db_size);
  options.scoring.workers = args.workers;
  options.dev_tiering = ParseDevTiering(args.dev_tiering);
  const SbclBuild built = BuildSbcl(corpus, options);

  const fs::path out(args.out);
  fs::create_directories(out);
  WriteSbcl(out / "sbcl_train.jsonl", built.train);
  if (!built.dev.empty()) WriteSbcl(out / "sbcl_dev.jsonl", built.dev);

  ordered_json stats;
  stats["db_size"] = args.db_size;
  stats["dev_tiering"] = args.dev_tiering;
  stats["max_size"] = built.max_size;
  stats["weights"] = ToJson(options.scoring.weights);
  stats["schema"] = ordered_json::array();
  for (Source source : {Source::kSpider, Source::kBird}) {
    for (Split split : {Split::kTrain, Split::kDev}) {
      const SchemaStats st =
          ComputeSchemaStats(corpus.examples, corpus.schemas, source, split);
      if (st.n_examples > 0) {
        stats["schema"].push_back(ToJson(st, source, split));
      }
    }
  }
  std::vector<SbclRecord> all = built.train;
  all.insert(all.end(), built.dev.begin(), built.dev.end());
  stats["tiers"] = ordered_json::array();
  for (const auto& tc : ComputeTierStats(all)) {
    stats["tiers"].push_back(ToJson(tc));
  }
  stats["failures"] = ordered_json::array();
  for (const auto& f : built.failures) {
    stats["failures"].push_back({{"id", f.id}, {"message", f.message}});
  }
  WriteText(out / "stats.json", stats.dump(2) + "\n");

  std::cerr << "train " << built.train.size() << ", dev " << built.dev.size()
            << ", failures " << built.failures.size() << ", max_size "
            << built.max_size << " -> " << out.string() << '\n';
  return 0;
}

int RunStats(const std::string& in) {
  const std::vector<SbclRecord> records = ReadSbcl(in);
  ordered_json out = ordered_json::array();
  for (const auto& tc : ComputeTierStats(records)) out.push_back(ToJson(tc));
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

void AddScoreCommand(CLI::App& app, Runner& run) {
  auto args = std::make_shared<ScoreArgs>();
  CLI::App* cmd = app.add_subcommand(
      "score", "Print the query shape of one SQL text, or score a dataset");
  auto* sql = cmd->add_option("--sql", args->sql, "SQL text to analyze");
  auto* dataset = cmd->add_option("--dataset", args->dataset,
                                  "Dataset manifest JSON")
                      ->check(CLI::ExistingFile);
  sql->excludes(dataset);
  cmd->add_option("--workers", args->workers, "Scoring threads (0 = auto)");
  cmd->callback([args, &run] {
    run = [args] {
      if (!args->dataset.empty()) return RunScoreDataset(*args);
      if (args->sql.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "one of --sql / --dataset is required");
      }
      std::cout << sql::ToJson(sql::Analyze(args->sql)).dump(2) << '\n';
      return 0;
    };
  });
}

void AddBuildCommand(CLI::App& app, Runner& run) {
  auto args = std::make_shared<BuildArgs>();
  CLI::App* cmd =
      app.add_subcommand("build", "Merge, sort and tier corpora into SB-CL");
  cmd->add_option("--spider", args->spider, "Spider release directory")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--bird", args->bird, "BIRD release directory")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--db-size", args->db_size, "Database size measure")
      ->check(CLI::IsMember({"ddl", "file-bytes"}));
  cmd->add_option("--dev-tiering", args->dev_tiering, "Dev tier assignment")
      ->check(CLI::IsMember({"train-bounds", "requartile"}));
  cmd->add_option("--out", args->out, "Output directory")->required();
  cmd->add_option("--workers", args->workers, "Scoring threads (0 = auto)");
  cmd->callback([args, &run] { run = [args] { return RunBuild(*args); }; });
}

void AddStatsCommand(CLI::App& app, Runner& run) {
  auto in = std::make_shared<std::string>();
  CLI::App* cmd = app.add_subcommand("stats", "Tier counts of an SB-CL file");
  cmd->add_option("--in", *in, "SB-CL JSON Lines file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->callback([in, &run] { run = [in] { return RunStats(*in); }; });
}

}  // namespace legoforge::cli
