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

#ifndef IFCGRASP_SIM_ROLLOUT_H_
#define IFCGRASP_SIM_ROLLOUT_H_

#include <array>
#include <cstdint>
#include <vector>

#include "ifcgrasp/metrics/metrics.h"
#include "ifcgrasp/numerics/array.h"
#include "ifcgrasp/sim/render.h"
#include "ifcgrasp/sim/scenario.h"
#include "ifcgrasp/sim/world.h"

namespace ifcgrasp::sim {

inline constexpr int kActionDim = kNumJoints + 1;
using Vector4 = std::array<double, kActionDim>;

// Commanded joints then gripper (0 closed, 1 open).
struct Command {
  Joints joints{0, 0, 0};
  double gripper = 1.0;

  Vector4 AsVector() const { return {joints[0], joints[1], joints[2], gripper}; }
};

// Joint angles then gripper opening.
Vector4 Proprioception(const ArmState& arm);

// Flat snapshot: target position (2), velocity (2), angle, angular velocity,
// joints (3), joint velocities (3), gripper, gripper command, captured, step.
inline constexpr int kStateDim = 16;
std::array<float, kStateDim> EncodeState(const WorldState& w);
// Mass, size and dt come from params.
WorldState DecodeState(const SimParams& params, const float* row);

struct Observation {
  int64_t step = 0;
  const WorldState* world = nullptr;           // privileged; experts only
  const num::Array<float>* images = nullptr;   // [C, H, W, 3]
  const num::Array<float>* previous = nullptr; // correlation camera at t-1
  Vector4 proprio{};
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual bool needs_images() const { return false; }
  virtual void Reset(const Episode& episode) { (void)episode; }
  virtual Command Act(const Observation& obs) = 0;
  // Every chunk emitted this episode, for chunked controllers.
  virtual const std::vector<metrics::ChunkPrediction>* chunk_history() const {
    return nullptr;
  }
};

struct RolloutOptions {
  double halt_eps = 1e-3;
  double hold_after_halt = 1.0;  // s of logging after the halt
  double time_limit = 25.0;
  std::vector<CameraSpec> cameras = DefaultCameras(64, 80);
  int correlation_camera = 0;
};

struct StepRecord {
  WorldState state;  // observed state, before the command
  Command command;
  StepEvents events;
};

struct RolloutResult {
  metrics::EpisodeLog log;
  std::vector<StepRecord> steps;
  int64_t halt_step = -1;
};

// Per step: scenario dynamics, observation, controller, world step. Stops
// hold_after_halt seconds after the captured target halts or at the time
// limit.
RolloutResult Rollout(const SimParams& params, Episode episode,
                      Controller& controller, const RolloutOptions& options = {});

}  // namespace ifcgrasp::sim

#endif  // IFCGRASP_SIM_ROLLOUT_H_
