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

#include "ifcgrasp/sim/rollout.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::sim {

Vector4 Proprioception(const ArmState& arm) {
  return {arm.joints[0], arm.joints[1], arm.joints[2], arm.gripper};
}

std::array<float, kStateDim> EncodeState(const WorldState& w) {
  const TargetState& t = w.target;
  const ArmState& a = w.arm;
  return {static_cast<float>(t.position.x()), static_cast<float>(t.position.y()),
          static_cast<float>(t.velocity.x()), static_cast<float>(t.velocity.y()),
          static_cast<float>(t.angle), static_cast<float>(t.angular_velocity),
          static_cast<float>(a.joints[0]), static_cast<float>(a.joints[1]),
          static_cast<float>(a.joints[2]), static_cast<float>(a.velocities[0]),
          static_cast<float>(a.velocities[1]), static_cast<float>(a.velocities[2]),
          static_cast<float>(a.gripper), static_cast<float>(a.gripper_command),
          w.captured ? 1.0f : 0.0f, static_cast<float>(w.step)};
}

WorldState DecodeState(const SimParams& params, const float* r) {
  WorldState w;
  w.dt = params.dt;
  TargetState& t = w.target;
  t.mass = params.target_mass;
  t.size = params.target_size;
  t.inertia = t.mass * t.size * t.size / 6.0;
  t.position = Vec2(r[0], r[1]);
  t.velocity = Vec2(r[2], r[3]);
  t.angle = r[4];
  t.angular_velocity = r[5];
  for (int j = 0; j < kNumJoints; ++j) {
    w.arm.joints[j] = r[6 + j];
    w.arm.velocities[j] = r[9 + j];
  }
  w.arm.gripper = r[12];
  w.arm.gripper_command = r[13];
  w.captured = r[14] > 0.5f;
  w.step = static_cast<int64_t>(std::llround(r[15]));
  w.time = w.step * params.dt;
  return w;
}

namespace {

num::Array<float> Slice(const num::Array<float>& stack, int index) {
  const auto& s = stack.shape();
  num::Array<float> out({s[1], s[2], s[3]});
  const int64_t per = out.size();
  std::copy(stack.data() + index * per, stack.data() + (index + 1) * per,
            out.data());
  return out;
}

}  // namespace

RolloutResult Rollout(const SimParams& params, Episode episode,
                      Controller& controller, const RolloutOptions& options) {
  if (!(params.dt > 0)) throw ConfigError("dt must be positive");
  const int cams = static_cast<int>(options.cameras.size());
  if (controller.needs_images() &&
      (options.correlation_camera < 0 || options.correlation_camera >= cams)) {
    throw ConfigError("correlation camera index out of range");
  }
  WorldState& w = episode.world;
  w.dt = params.dt;
  controller.Reset(episode);

  RolloutResult out;
  metrics::EpisodeLog& log = out.log;
  log.joints.dt = params.dt;
  auto record = [&] {
    log.joints.angles.emplace_back(w.arm.joints.begin(), w.arm.joints.end());
    log.target_speed.push_back(w.target.velocity.norm());
  };
  record();
  if (w.captured) log.capture_step = 0;

  const int64_t hold_steps = std::llround(options.hold_after_halt / params.dt);
  const int64_t max_steps = std::llround(options.time_limit / params.dt);
  num::Array<float> images, previous;
  while (w.step < max_steps) {
    ApplyScenarioDynamics(params, w, episode.scenario);
    Observation obs;
    obs.step = w.step;
    obs.world = &w;
    obs.proprio = Proprioception(w.arm);
    if (controller.needs_images()) {
      images = RenderAll(params, w, options.cameras, episode.scenario);
      if (w.step == 0) previous = Slice(images, options.correlation_camera);
      obs.images = &images;
      obs.previous = &previous;
    }
    StepRecord rec;
    rec.state = w;
    rec.command = controller.Act(obs);
    if (controller.needs_images()) {
      previous = Slice(images, options.correlation_camera);
    }
    rec.events = StepWorld(params, w, rec.command.joints, rec.command.gripper);
    out.steps.push_back(std::move(rec));
    record();
    const int64_t sample = static_cast<int64_t>(log.target_speed.size()) - 1;
    if (w.captured && log.capture_step < 0) log.capture_step = sample;
    if (w.captured && out.halt_step < 0 &&
        log.target_speed.back() < options.halt_eps) {
      out.halt_step = w.step;
    }
    if (out.halt_step >= 0 && w.step - out.halt_step >= hold_steps) break;
  }
  log.complete = true;
  return out;
}

}  // namespace ifcgrasp::sim
