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

// Planar testbed state. Units: meters, seconds, radians, kilograms. The arm
// base sits at the origin and its home direction is +x.

#ifndef IFCGRASP_SIM_TYPES_H_
#define IFCGRASP_SIM_TYPES_H_

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace ifcgrasp::sim {

using Vec2 = Eigen::Vector2d;

inline constexpr int kNumJoints = 3;
using Joints = std::array<double, kNumJoints>;

struct TargetState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double angle = 0;
  double angular_velocity = 0;
  double mass = 2.0;
  double inertia = 2.0 * 0.08 * 0.08 / 6.0;  // solid square plate
  double size = 0.08;                        // side length
  Vec2 grasp_offset = Vec2::Zero();          // body frame

  Vec2 GraspPoint() const;
};

struct ArmParams {
  Joints links{0.2, 0.2, 0.1};
  Joints lower{-1.5707963267948966, 0.05, -2.5};
  Joints upper{1.5707963267948966, 2.8, 2.5};
  double max_speed = 0.5;     // rad/s per joint
  double gripper_rate = 2.5;  // opening units per second
};

struct ArmState {
  Joints joints{0, 0, 0};
  Joints velocities{0, 0, 0};
  double gripper = 1.0;          // opening, 1 = open
  double gripper_command = 1.0;  // last command
};

// Axis-aligned region the target is confined to (elastic walls).
struct Bounds {
  double x_min = -0.25;
  double x_max = 0.85;
  double y_min = -0.5;
  double y_max = 0.5;
};

struct SimParams {
  double dt = 0.04;
  ArmParams arm;
  Bounds bounds;
  double capture_radius = 0.02;
  double target_mass = 2.0;
  double target_size = 0.08;
};

struct WorldState {
  TargetState target;
  ArmState arm;
  bool captured = false;
  int64_t step = 0;
  double time = 0;
  double dt = 0.04;
};

}  // namespace ifcgrasp::sim

#endif  // IFCGRASP_SIM_TYPES_H_
