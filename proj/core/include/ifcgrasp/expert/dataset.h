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

#ifndef IFCGRASP_EXPERT_DATASET_H_
#define IFCGRASP_EXPERT_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifcgrasp/expert/expert.h"
#include "ifcgrasp/numerics/array.h"
#include "ifcgrasp/sim/rollout.h"

namespace ifcgrasp::expert {

struct DemoEpisode {
  std::string scenario;
  uint64_t seed = 0;
  int64_t capture_step = -1;
  int64_t halt_step = -1;
  std::vector<double> masd;
  num::Array<float> proprio;  // [T, 4]
  num::Array<float> actions;  // [T, 4]
  num::Array<float> states;   // [T, kStateDim], observed before each action
  num::Array<float> events;   // [T, 2]: capture, halt at this step
  num::Array<float> images;   // [T, C, H, W, 3]; empty unless stored
  sim::EpisodeScenario render_scenario;  // re-spawned from (scenario, seed)

  int length() const { return proprio.shape().empty() ? 0 : proprio.shape()[0]; }
};

struct DatasetOptions {
  int episodes = 100;
  sim::ScenarioKind scenario = sim::ScenarioKind::kStandard;
  uint64_t seed = 0;
  // Frames are a deterministic function of (state, scenario seed, step), so
  // they are re-rendered on load unless this is set.
  bool store_images = false;
  int image_height = 64;
  int image_width = 80;
  double demo_masd_limit = 0.089;  // per joint
  sim::SimParams sim;
  ExpertOptions expert;
  sim::RolloutOptions rollout;

  nlohmann::json ToJson() const;
  // Throws ConfigError on missing or invalid fields.
  static DatasetOptions FromJson(const nlohmann::json& j);
};

struct Dataset {
  DatasetOptions options;
  nlohmann::json config;
  std::string config_hash;
  int attempts = 0;
  std::vector<DemoEpisode> episodes;
};

// Per-episode seed stream derived from (master seed, attempt index).
uint64_t EpisodeSeed(uint64_t master, int64_t index);

// Rolls out the expert until `episodes` demonstrations pass the success gate
// and the MASD headroom limit. Throws InvariantError after 10n attempts.
Dataset GenerateDataset(const DatasetOptions& options);

void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir);
// Throws IoError on layout problems; ConfigError with a diff if
// `expected_config` is given and its hash differs.
Dataset LoadDataset(const std::filesystem::path& dir,
                    const nlohmann::json* expected_config = nullptr);

// [C, H, W, 3] frames for one stored step (re-rendered when not stored).
num::Array<float> EpisodeFrames(const Dataset& dataset, int episode, int step);

nlohmann::json SimParamsJson(const sim::SimParams& params);
sim::SimParams SimParamsFromJson(const nlohmann::json& j);

}  // namespace ifcgrasp::expert

#endif  // IFCGRASP_EXPERT_DATASET_H_
