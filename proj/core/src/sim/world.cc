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

#include "ifcgrasp/sim/world.h"

#include <algorithm>
#include <cmath>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::sim {

TargetState StepTarget(const TargetState& s, const Vec2& impulse, double dt,
                       const Bounds* bounds) {
  TargetState n = s;
  n.velocity = s.velocity + impulse / s.mass;
  n.position = s.position + n.velocity * dt;
  n.angle = s.angle + s.angular_velocity * dt;
  if (bounds != nullptr) {
    const double half = 0.5 * s.size;
    auto reflect = [](double& x, double& v, double lo, double hi) {
      if (x < lo) {
        x = 2 * lo - x;
        v = std::abs(v);
      } else if (x > hi) {
        x = 2 * hi - x;
        v = -std::abs(v);
      }
    };
    reflect(n.position.x(), n.velocity.x(), bounds->x_min + half,
            bounds->x_max - half);
    reflect(n.position.y(), n.velocity.y(), bounds->y_min + half,
            bounds->y_max - half);
  }
  return n;
}

ArmState StepArm(const ArmParams& arm, const ArmState& s, const Joints& command,
                 double gripper_command, double dt) {
  for (double c : command) {
    if (!std::isfinite(c)) throw NumericError("non-finite joint command");
  }
  if (!std::isfinite(gripper_command)) {
    throw NumericError("non-finite gripper command");
  }
  ArmState n = s;
  const double step = arm.max_speed * dt;
  for (int j = 0; j < kNumJoints; ++j) {
    const double delta = std::clamp(command[j] - s.joints[j], -step, step);
    n.joints[j] = std::clamp(s.joints[j] + delta, arm.lower[j], arm.upper[j]);
    n.velocities[j] = (n.joints[j] - s.joints[j]) / dt;
  }
  const double goal = std::clamp(gripper_command, 0.0, 1.0);
  const double g_step = arm.gripper_rate * dt;
  n.gripper = s.gripper + std::clamp(goal - s.gripper, -g_step, g_step);
  n.gripper_command = gripper_command;
  return n;
}

bool CaptureCondition(const SimParams& params, const WorldState& w) {
  const Vec2 ee = EndEffector(params.arm, w.arm.joints);
  return w.arm.gripper_command < 0.5 &&
         (ee - w.target.GraspPoint()).norm() <= params.capture_radius;
}

namespace {

// Places the target so that its grasp point sits on the end effector.
void Attach(const SimParams& params, WorldState& w, double relative_angle) {
  const Vec2 ee = EndEffector(params.arm, w.arm.joints);
  w.target.angle = EndEffectorHeading(w.arm.joints) + relative_angle;
  const double c = std::cos(w.target.angle), s = std::sin(w.target.angle);
  const Vec2& o = w.target.grasp_offset;
  w.target.position = ee - Vec2(c * o.x() - s * o.y(), s * o.x() + c * o.y());
}

}  // namespace

StepEvents StepWorld(const SimParams& params, WorldState& w,
                     const Joints& command, double gripper_command) {
  StepEvents events;
  const double dt = w.dt;
  const Vec2 ee_before = EndEffector(params.arm, w.arm.joints);
  const double heading_before = EndEffectorHeading(w.arm.joints);
  const Vec2 v_before = w.target.velocity;
  w.arm = StepArm(params.arm, w.arm, command, gripper_command, dt);
  const Vec2 ee_after = EndEffector(params.arm, w.arm.joints);
  const double heading_after = EndEffectorHeading(w.arm.joints);

  if (w.captured) {
    Attach(params, w, w.target.angle - heading_before);
    w.target.velocity = (ee_after - ee_before) / dt;
    w.target.angular_velocity = (heading_after - heading_before) / dt;
  } else {
    w.target = StepTarget(w.target, Vec2::Zero(), dt, &params.bounds);
    if (CaptureCondition(params, w)) {
      w.captured = true;
      events.captured_now = true;
      Attach(params, w, w.target.angle - heading_after);
      w.target.velocity = (ee_after - ee_before) / dt;
      w.target.angular_velocity = (heading_after - heading_before) / dt;
    }
  }
  if (w.captured) {
    events.target_acceleration = (w.target.velocity - v_before) / dt;
    const Eigen::Vector3d tau = PositionJacobian(params.arm, w.arm.joints)
                                    .transpose() *
                                (w.target.mass * events.target_acceleration);
    for (int j = 0; j < kNumJoints; ++j) events.hold_torque[j] = tau[j];
  }
  ++w.step;
  w.time = w.step * dt;
  return events;
}

}  // namespace ifcgrasp::sim
