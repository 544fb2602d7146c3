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

#include "ifcgrasp/sim/scenario.h"

#include <algorithm>
#include <cmath>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/numerics/rng.h"
#include "ifcgrasp/sim/kinematics.h"
#include "ifcgrasp/sim/world.h"

namespace ifcgrasp::sim {

std::string ScenarioName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kStandard:
      return "standard";
    case ScenarioKind::kLowLight:
      return "low_light";
    case ScenarioKind::kCameraOcclusion:
      return "camera_occlusion";
    case ScenarioKind::kTargetOcclusion:
      return "target_occlusion";
    case ScenarioKind::kTargetManeuver:
      return "target_maneuver";
    case ScenarioKind::kGrayscale:
      return "grayscale";
  }
  return "standard";
}

std::vector<ScenarioKind> AllScenarios() {
  return {ScenarioKind::kStandard,        ScenarioKind::kLowLight,
          ScenarioKind::kCameraOcclusion, ScenarioKind::kTargetOcclusion,
          ScenarioKind::kTargetManeuver,  ScenarioKind::kGrayscale};
}

ScenarioKind ParseScenario(const std::string& name) {
  for (ScenarioKind k : AllScenarios()) {
    if (ScenarioName(k) == name) return k;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioConfig ScenarioConfig::Standard() { return ScenarioConfig{}; }

ScenarioConfig ScenarioConfig::For(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  return c;
}

ScenarioConfig ScenarioConfig::MonteCarlo(const Vec2& home_offset) {
  ScenarioConfig c;
  c.speed_min = 0.0135;
  c.speed_max = 0.018;
  c.home_offset = home_offset;
  return c;
}

void ScenarioConfig::Validate() const {
  if (!(speed_min > 0 && speed_max >= speed_min)) {
    throw ConfigError("scenario speed range must satisfy 0 < min <= max");
  }
  if (!(spawn_radius_min > 0 && spawn_radius_max >= spawn_radius_min)) {
    throw ConfigError("bad spawn radius range");
  }
  if (!(gamma_min > 0 && gamma_max >= gamma_min && gamma_max <= 1)) {
    throw ConfigError("low-light gamma range must lie in (0, 1]");
  }
  if (!(occlusion_area_min > 0 && occlusion_area_max >= occlusion_area_min &&
        occlusion_area_max <= 1)) {
    throw ConfigError("occlusion area fractions must lie in (0, 1]");
  }
  if (!(time_limit > 0 && nominal_duration > 0)) {
    throw ConfigError("time limit and nominal duration must be positive");
  }
}

Joints HomePose(const SimParams& params, const Vec2& offset) {
  auto q = InverseKinematics(params.arm, Vec2(0.28, 0.0) + offset, 0.0);
  if (!q) throw ConfigError("home pose offset is not reachable");
  return *q;
}

namespace {

Vec2 Direction(double angle) { return Vec2(std::cos(angle), std::sin(angle)); }

// Heading toward the base from `p`, perturbed within the cone.
Vec2 DrawVelocity(const ScenarioConfig& c, const Vec2& p, num::CounterRng& rng) {
  const double toward = std::atan2(-p.y(), -p.x());
  const double angle =
      toward + rng.Uniform(-c.cone_half_angle, c.cone_half_angle);
  return rng.Uniform(c.speed_min, c.speed_max) * Direction(angle);
}

}  // namespace

Episode SpawnEpisode(const ScenarioConfig& config, const SimParams& params,
                     uint64_t seed) {
  config.Validate();
  Episode e;
  e.scenario.config = config;
  e.scenario.seed = seed;
  num::CounterRng rng(seed, 0x5ca1);

  WorldState& w = e.world;
  w.dt = params.dt;
  w.arm.joints = HomePose(params, config.home_offset);
  TargetState& t = w.target;
  t.mass = params.target_mass;
  t.size = params.target_size;
  t.inertia = t.mass * t.size * t.size / 6.0;
  const double bearing = config.bearing_center +
                         rng.Uniform(-config.spawn_bearing, config.spawn_bearing);
  const double radius = rng.Uniform(config.spawn_radius_min, config.spawn_radius_max);
  t.position = radius * Direction(bearing);
  t.velocity = DrawVelocity(config, t.position, rng);
  t.angle = rng.Uniform(-M_PI, M_PI);
  t.angular_velocity = rng.Uniform(-config.spin_max, config.spin_max);

  // Closest approach of the straight path to the base must be reachable.
  const Vec2 dir = t.velocity.normalized();
  const double along = -t.position.dot(dir);
  const double miss = (t.position + std::max(along, 0.0) * dir).norm();
  double reach = 0;
  for (double l : params.arm.links) reach += l;
  if (miss >= reach) {
    throw InvariantError("target path does not intersect the workspace");
  }

  EpisodeScenario& s = e.scenario;
  num::CounterRng srng = rng.Fork(1);
  switch (config.kind) {
    case ScenarioKind::kLowLight:
      s.gamma = srng.Uniform(config.gamma_min, config.gamma_max);
      break;
    case ScenarioKind::kCameraOcclusion: {
      s.occluded_camera = static_cast<int>(srng.UniformInt(0, 2));
      const double area =
          srng.Uniform(config.occlusion_area_min, config.occlusion_area_max);
      const double aspect = srng.Uniform(0.7, 1.4);
      const double wf = std::min(1.0, std::sqrt(area * aspect));
      const double hf = std::min(1.0, area / wf);
      const double r0 = srng.Uniform(0.0, 1.0 - hf);
      const double c0 = srng.Uniform(0.0, 1.0 - wf);
      s.occluder = {r0, c0, r0 + hf, c0 + wf};
      const double start = srng.Uniform(0.0, config.occlusion_start_max);
      const double len = srng.Uniform(config.occlusion_duration_min,
                                      config.occlusion_duration_max);
      s.occlusion_begin = std::llround(start / params.dt);
      s.occlusion_end = std::llround((start + len) / params.dt);
      break;
    }
    case ScenarioKind::kTargetOcclusion: {
      const double d =
          srng.Uniform(config.strip_distance_min, config.strip_distance_max);
      const Vec2 center = t.position + d * dir;
      const Vec2 across(-dir.y(), dir.x());
      const double hw = 0.5 * config.strip_width, hl = 0.25;
      s.strip = {center - hw * dir - hl * across, center + hw * dir - hl * across,
                 center + hw * dir + hl * across, center - hw * dir + hl * across};
      break;
    }
    case ScenarioKind::kTargetManeuver: {
      const double at = srng.Uniform(config.nominal_duration / 3.0,
                                     2.0 * config.nominal_duration / 3.0);
      s.maneuver_step = std::llround(at / params.dt);
      break;
    }
    case ScenarioKind::kStandard:
    case ScenarioKind::kGrayscale:
      break;
  }
  return e;
}

bool ApplyScenarioDynamics(const SimParams& params, WorldState& w,
                           EpisodeScenario& scenario) {
  (void)params;
  if (scenario.config.kind != ScenarioKind::kTargetManeuver ||
      scenario.maneuver_done || w.step != scenario.maneuver_step) {
    return false;
  }
  scenario.maneuver_done = true;
  if (w.captured) return false;
  num::CounterRng rng(scenario.seed, 0x3a9e);
  const Vec2 v = DrawVelocity(scenario.config, w.target.position, rng);
  w.target = StepTarget(w.target, w.target.mass * (v - w.target.velocity), 0.0);
  return true;
}

}  // namespace ifcgrasp::sim
