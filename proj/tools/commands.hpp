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

#ifndef LEGOFORGE_TOOLS_COMMANDS_HPP_
#define LEGOFORGE_TOOLS_COMMANDS_HPP_

#include <functional>

#include "CLI11.hpp"

namespace legoforge::cli {

using Runner = std::function<int()>;

// Each function registers one subcommand on `app` and stores the code to
// run when it is selected into `run`.
void AddScoreCommand(CLI::App& app, Runner& run);
void AddBuildCommand(CLI::App& app, Runner& run);
void AddStatsCommand(CLI::App& app, Runner& run);
void AddPlanCommand(CLI::App& app, Runner& run);
void AddSimulateCommand(CLI::App& app, Runner& run);
void AddEvalCommand(CLI::App& app, Runner& run);

}  // namespace legoforge::cli

#endif  // LEGOFORGE_TOOLS_COMMANDS_HPP_
