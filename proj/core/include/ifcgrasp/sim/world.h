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

#ifndef IFCGRASP_SIM_WORLD_H_
#define IFCGRASP_SIM_WORLD_H_

#include "ifcgrasp/sim/kinematics.h"
#include "ifcgrasp/sim/types.h"

namespace ifcgrasp::sim {

// Symplectic Euler, velocity first: v += impulse / m, x += v dt,
// angle += omega dt. With `bounds`, a wall contact reflects the position and
// negates the normal velocity component.
TargetState StepTarget(const TargetState& s, const Vec2& impulse, double dt,
                       const Bounds* bounds = nullptr);

// Position-command tracking: each joint moves toward its command by at most
// max_speed * dt and is clamped to its limits; the gripper slews toward the
// clamped command. Throws NumericError on a non-finite command.
ArmState StepArm(const ArmParams& arm, const ArmState& s, const Joints& command,
                 double gripper_command, double dt);

struct StepEvents {
  bool captured_now = false;
  Vec2 target_acceleration = Vec2::Zero();
  // J(q)^T (m a_target): joint-space load of holding the target.
  Joints hold_torque{0, 0, 0};
};

// True when the gripper command is closing (< 0.5) and the end effector is
// within the capture radius of the target grasp point.
bool CaptureCondition(const SimParams& params, const WorldState& w);

// Advances one control step: arm, then target (free glide or rigidly carried
// by the end effector), then the capture check. On capture the grasp point
// snaps to the end effector and the target takes the end-effector velocity.
StepEvents StepWorld(const SimParams& params, WorldState& w,
                     const Joints& command, double gripper_command);

}  // namespace ifcgrasp::sim

#endif  // IFCGRASP_SIM_WORLD_H_
