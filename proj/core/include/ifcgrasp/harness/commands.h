// Copyright 2026 The ifcgrasp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IFCGRASP_HARNESS_COMMANDS_H_
#define IFCGRASP_HARNESS_COMMANDS_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifcgrasp/harness/run.h"

namespace ifcgrasp::harness {

// Special checkpoint name that evaluates the scripted expert.
inline constexpr const char* kExpertCheckpoint = "expert";

using Progress = std::function<void(const std::string&)>;

// Each command writes its artifacts under `out` and returns a short summary.
nlohmann::json GenDataCommand(const RunConfig& config, const std::filesystem::path& out);

// With `check_config`, a dataset generated from different options is refused.
nlohmann::json TrainCommand(const RunConfig& config, const std::filesystem::path& dataset,
                            const std::filesystem::path& out, bool disable_correlation,
                            bool check_config, const Progress& progress = {});

// Scenarios and counts come from config.eval.
nlohmann::json EvalCommand(const RunConfig& config, const std::string& checkpoint,
                           const std::filesystem::path& out, const Progress& progress = {});

nlohmann::json MonteCarloCommand(const RunConfig& config, const std::string& checkpoint,
                                 const std::filesystem::path& out);

// Gathers report.json files from eval directories into summary.json and
// summary.csv; rows are labeled by directory name.
nlohmann::json ReportCommand(const std::vector<std::filesystem::path>& inputs,
                             const std::filesystem::path& out);

// "RxC" with both positive.
std::pair<int, int> ParseGrid(const std::string& text);

}  // namespace ifcgrasp::harness

#endif  // IFCGRASP_HARNESS_COMMANDS_H_
