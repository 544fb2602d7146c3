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

#ifndef IFCGRASP_HARNESS_RUN_H_
#define IFCGRASP_HARNESS_RUN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifcgrasp/expert/dataset.h"
#include "ifcgrasp/harness/deploy.h"
#include "ifcgrasp/metrics/metrics.h"
#include "ifcgrasp/policy/model.h"
#include "ifcgrasp/policy/train.h"
#include "ifcgrasp/sim/rollout.h"

namespace ifcgrasp::harness {

struct TrainConfig {
  int steps = 3000;
  int batch_size = 8;
  double learning_rate = 3e-4;
  double weight_decay = 1e-4;
  bool cosine_decay = false;
  int warmup_steps = 0;
  double max_grad_norm = 0.0;  // 0 disables clipping
  uint64_t seed = 0;       // sample order and latent noise
  uint64_t init_seed = 0;  // parameter initialization
};

struct EvalConfig {
  int episodes = 50;
  uint64_t seed = 1000;
  std::vector<std::string> scenarios{"standard", "target_maneuver"};
};

// Either arm home offsets (lateral x longitudinal) or, for the grayscale
// heat map, target bearing offsets x speed bins.
struct MonteCarloConfig {
  int rows = 5;
  int cols = 5;
  int episodes_per_cell = 2;
  std::string axes = "home_offset";  // or "target_offset_speed"
  std::string scenario = "standard";
  double lateral = 0.04;       // +- m, rows
  double longitudinal = 0.04;  // +- m, cols
  double bearing = 0.4;        // +- rad, rows (target_offset_speed)
  double speed_min = 0.0135;   // m/s, cols
  double speed_max = 0.018;
  uint64_t seed = 2000;
};

struct RunConfig {
  std::string preset = "desk";
  expert::DatasetOptions dataset;
  nlohmann::json policy = nlohmann::json::object();  // overrides
  TrainConfig train;
  EvalConfig eval;
  MonteCarloConfig montecarlo;

  // Unknown keys or bad values raise ConfigError.
  static RunConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  // Throws ConfigError for the shape-only paper preset.
  policy::PolicyConfig Policy(bool disable_correlation) const;
  void RequireRunnable() const;
};

RunConfig LoadRunConfig(const std::filesystem::path& path);

// Checkpoint: one stream per parameter plus the loss curve; the manifest
// carries config, normalizers and provenance.
struct Checkpoint {
  policy::PolicyConfig config;
  Normalizers norm;
  std::unique_ptr<policy::ActPolicy<float>> policy;
  nlohmann::json provenance;
  std::string hash;  // FNV-1a over the manifest text
};

void SaveCheckpoint(const std::filesystem::path& dir,
                    const policy::ActPolicy<float>& policy, const Normalizers& norm,
                    const nlohmann::json& provenance,
                    const std::vector<policy::TrainStats>& curve);
Checkpoint LoadCheckpoint(const std::filesystem::path& dir);

struct TrainResult {
  std::unique_ptr<policy::ActPolicy<float>> policy;
  Normalizers norm;
  std::vector<policy::TrainStats> curve;
};

TrainResult TrainPolicy(const RunConfig& config, const expert::Dataset& dataset,
                        bool disable_correlation,
                        const std::function<void(const policy::TrainStats&)>& progress = {});

struct EpisodeOutcome {
  int index = 0;
  uint64_t seed = 0;
  metrics::SuccessRecord record;
  int64_t steps = 0;
  int64_t capture_step = -1;
  int64_t halt_step = -1;
  double initial_speed = 0;
  double divergence = 0;
  std::vector<double> divergence_curve;
  std::vector<double> reaction_torque;
  std::vector<double> max_hold_torque;
};

struct ScenarioSummary {
  std::string scenario;
  std::vector<EpisodeOutcome> episodes;

  int successes() const;
  double success_rate() const;
  nlohmann::json ToJson() const;
};

using ControllerFactory = std::function<std::unique_ptr<sim::Controller>()>;

ControllerFactory ExpertFactory(const sim::SimParams& params);
ControllerFactory PolicyFactory(const policy::ActPolicy<float>& policy,
                                const Normalizers& norm);

// n seeded episodes; spawn failures advance to the next seed index.
ScenarioSummary EvaluateScenario(const sim::SimParams& params,
                                 const sim::ScenarioConfig& scenario, int episodes,
                                 uint64_t seed, const ControllerFactory& factory,
                                 const sim::RolloutOptions& rollout);

struct GridCell {
  int row = 0;
  int col = 0;
  double row_value = 0;
  double col_value = 0;
  int episodes = 0;
  int successes = 0;
};

std::vector<GridCell> RunMonteCarlo(const sim::SimParams& params,
                                    const MonteCarloConfig& config,
                                    const ControllerFactory& factory,
                                    const sim::RolloutOptions& rollout);

// report.json and metrics.csv.
void WriteEvalReport(const std::filesystem::path& dir,
                     const std::vector<ScenarioSummary>& scenarios,
                     const nlohmann::json& provenance);
void WriteGridReport(const std::filesystem::path& dir, const std::vector<GridCell>& cells,
                     const MonteCarloConfig& config, const nlohmann::json& provenance);

// Reference hardware success rates, carried as non-reproducible context.
nlohmann::json HardwareReferenceRates();

}  // namespace ifcgrasp::harness

#endif  // IFCGRASP_HARNESS_RUN_H_
