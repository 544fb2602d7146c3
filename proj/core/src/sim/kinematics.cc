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

#include "ifcgrasp/sim/kinematics.h"

#include <algorithm>
#include <cmath>

namespace ifcgrasp::sim {

Vec2 TargetState::GraspPoint() const {
  const double c = std::cos(angle), s = std::sin(angle);
  return position + Vec2(c * grasp_offset.x() - s * grasp_offset.y(),
                         s * grasp_offset.x() + c * grasp_offset.y());
}

std::array<Vec2, 4> JointPositions(const ArmParams& arm, const Joints& q) {
  std::array<Vec2, 4> p;
  p[0] = Vec2::Zero();
  double angle = 0;
  for (int j = 0; j < kNumJoints; ++j) {
    angle += q[j];
    p[j + 1] = p[j] + arm.links[j] * Vec2(std::cos(angle), std::sin(angle));
  }
  return p;
}

Vec2 EndEffector(const ArmParams& arm, const Joints& q) {
  return JointPositions(arm, q)[3];
}

double EndEffectorHeading(const Joints& q) { return q[0] + q[1] + q[2]; }

Eigen::Matrix<double, 2, 3> PositionJacobian(const ArmParams& arm,
                                             const Joints& q) {
  const std::array<Vec2, 4> p = JointPositions(arm, q);
  Eigen::Matrix<double, 2, 3> jac;
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec2 r = p[3] - p[j];
    jac(0, j) = -r.y();
    jac(1, j) = r.x();
  }
  return jac;
}

bool WithinLimits(const ArmParams& arm, const Joints& q) {
  for (int j = 0; j < kNumJoints; ++j) {
    if (q[j] < arm.lower[j] || q[j] > arm.upper[j]) return false;
  }
  return true;
}

std::optional<Joints> InverseKinematics(const ArmParams& arm, const Vec2& p,
                                        double heading) {
  const double l1 = arm.links[0], l2 = arm.links[1], l3 = arm.links[2];
  const Vec2 w = p - l3 * Vec2(std::cos(heading), std::sin(heading));
  const double r2 = w.squaredNorm();
  double c2 = (r2 - l1 * l1 - l2 * l2) / (2 * l1 * l2);
  // Round-off on the reach boundary.
  if (c2 < -1.0 - 1e-12 || c2 > 1.0 + 1e-12) return std::nullopt;
  c2 = std::clamp(c2, -1.0, 1.0);
  Joints q;
  q[1] = std::acos(c2);
  q[0] = std::atan2(w.y(), w.x()) -
         std::atan2(l2 * std::sin(q[1]), l1 + l2 * std::cos(q[1]));
  q[2] = heading - q[0] - q[1];
  // Wrap the wrist into (-pi, pi].
  q[2] = std::remainder(q[2], 2 * M_PI);
  if (!WithinLimits(arm, q)) return std::nullopt;
  return q;
}

}  // namespace ifcgrasp::sim
