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

#ifndef IFCGRASP_SIM_SCENARIO_H_
#define IFCGRASP_SIM_SCENARIO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ifcgrasp/sim/types.h"

namespace ifcgrasp::sim {

enum class ScenarioKind {
  kStandard,
  kLowLight,
  kCameraOcclusion,
  kTargetOcclusion,
  kTargetManeuver,
  kGrayscale,
};

std::string ScenarioName(ScenarioKind kind);
// Throws ConfigError for unknown names.
ScenarioKind ParseScenario(const std::string& name);
std::vector<ScenarioKind> AllScenarios();

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kStandard;
  double speed_min = 0.006;  // m/s
  double speed_max = 0.012;
  double cone_half_angle = 0.5235987755982988;  // 30 deg around the base bearing
  double spawn_radius_min = 0.46;
  double spawn_radius_max = 0.52;
  double bearing_center = 0.0;
  double spawn_bearing = 0.45;  // half-width of the spawn bearing range, rad
  double spin_max = 0.1;        // |omega|, rad/s
  Vec2 home_offset = Vec2::Zero();

  // low_light
  double gamma_min = 0.2;
  double gamma_max = 0.4;
  double noise_std = 0.02;
  // camera_occlusion
  double occlusion_area_min = 0.2;
  double occlusion_area_max = 0.5;
  double occlusion_start_max = 6.0;  // s
  double occlusion_duration_min = 2.0;
  double occlusion_duration_max = 5.0;
  // target_occlusion
  double strip_width = 0.05;
  double strip_distance_min = 0.03;  // along the initial path, m
  double strip_distance_max = 0.08;
  // target_maneuver: fires once in the middle third of this duration
  double nominal_duration = 9.0;

  double time_limit = 25.0;

  static ScenarioConfig Standard();
  static ScenarioConfig For(ScenarioKind kind);
  // Fast targets and a shifted home pose.
  static ScenarioConfig MonteCarlo(const Vec2& home_offset);
  void Validate() const;
};

// Per-episode draws of the scenario's random elements.
struct EpisodeScenario {
  ScenarioConfig config;
  uint64_t seed = 0;
  double gamma = 1.0;
  int occluded_camera = -1;
  // Normalized image rectangle: row0, col0, row1, col1 in [0, 1].
  std::array<double, 4> occluder{0, 0, 0, 0};
  int64_t occlusion_begin = 0;
  int64_t occlusion_end = 0;
  std::vector<Vec2> strip;  // world polygon, counter-clockwise
  int64_t maneuver_step = -1;
  bool maneuver_done = false;
};

struct Episode {
  WorldState world;
  EpisodeScenario scenario;
};

// Elbow-positive pose with the end effector at (0.28, 0) + offset facing +x.
Joints HomePose(const SimParams& params, const Vec2& offset);

// Target placed on an arc in front of the arm moving toward the base within
// the cone; arm at home. Deterministic in (config, params, seed). Throws
// InvariantError if the target path misses the reachable disc.
Episode SpawnEpisode(const ScenarioConfig& config, const SimParams& params,
                     uint64_t seed);

// Target maneuver: at the latched step, redraw direction and speed (applied
// as an impulse). Returns true when it fired this call.
bool ApplyScenarioDynamics(const SimParams& params, WorldState& w,
                           EpisodeScenario& scenario);

}  // namespace ifcgrasp::sim

#endif  // IFCGRASP_SIM_SCENARIO_H_
