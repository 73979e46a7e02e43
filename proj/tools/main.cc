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

#include <exception>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lego-forge: complexity-sorted curricula for text-to-SQL"};
  app.require_subcommand(1);
  legoforge::cli::Runner run;
  legoforge::cli::AddScoreCommand(app, run);
  legoforge::cli::AddBuildCommand(app, run);
  legoforge::cli::AddStatsCommand(app, run);
  legoforge::cli::AddPlanCommand(app, run);
  legoforge::cli::AddSimulateCommand(app, run);
  legoforge::cli::AddEvalCommand(app, run);
  CLI11_PARSE(app, argc, argv);
  try {
    return run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
