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

#ifndef IFCGRASP_SIM_KINEMATICS_H_
#define IFCGRASP_SIM_KINEMATICS_H_

#include <array>
#include <optional>

#include <Eigen/Core>

#include "ifcgrasp/sim/types.h"

namespace ifcgrasp::sim {

// Joint positions: [base, elbow, wrist, end effector].
std::array<Vec2, 4> JointPositions(const ArmParams& arm, const Joints& q);

Vec2 EndEffector(const ArmParams& arm, const Joints& q);
double EndEffectorHeading(const Joints& q);

// d(end effector) / dq, 2 x 3.
Eigen::Matrix<double, 2, 3> PositionJacobian(const ArmParams& arm,
                                             const Joints& q);

// Elbow-positive closed form: wrist = p - l3 * (cos h, sin h), two-link
// solution for the wrist, then q3 = h - q1 - q2. Empty when unreachable or
// outside joint limits.
std::optional<Joints> InverseKinematics(const ArmParams& arm, const Vec2& p,
                                        double heading);

bool WithinLimits(const ArmParams& arm, const Joints& q);

}  // namespace ifcgrasp::sim

#endif  // IFCGRASP_SIM_KINEMATICS_H_
