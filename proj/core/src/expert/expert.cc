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

#include "ifcgrasp/expert/expert.h"

#include <algorithm>
#include <cmath>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/sim/kinematics.h"

namespace ifcgrasp::expert {

double MinimumDuration(const sim::ArmParams& arm, double amplitude,
                       const ExpertOptions& options) {
  // Min-jerk peak speed is 1.875 A / T and its mean |acceleration| 3.75 A / T^2.
  const double speed = 1.875 * amplitude / (options.speed_margin * arm.max_speed);
  const double accel = std::sqrt(3.75 * amplitude / options.masd_budget);
  return std::max({options.min_duration, speed, accel});
}

std::optional<Intercept> PredictIntercept(const sim::SimParams& params,
                                          const sim::TargetState& target,
                                          const sim::ArmState& arm,
                                          const ExpertOptions& options) {
  const Vec2 start = target.GraspPoint();
  const int64_t steps = std::llround(options.horizon / params.dt);
  for (int64_t k = 0; k <= steps; ++k) {
    const double t = k * params.dt;
    const Vec2 p = start + t * target.velocity;
    const auto q = sim::InverseKinematics(params.arm, p, std::atan2(p.y(), p.x()));
    if (!q) continue;
    double amplitude = 0;
    for (int j = 0; j < sim::kNumJoints; ++j) {
      amplitude = std::max(amplitude, std::abs((*q)[j] - arm.joints[j]));
    }
    if (t - options.lead + 1e-9 < MinimumDuration(params.arm, amplitude, options)) {
      continue;
    }
    return Intercept{p, t, *q};
  }
  return std::nullopt;
}

Quintic::Quintic(double q0, double v0, double a0, double qf, double duration)
    : duration_(duration) {
  if (!(duration > 0)) throw InvariantError("quintic duration must be positive");
  const double h = qf - q0, T = duration;
  c_[0] = q0;
  c_[1] = v0;
  c_[2] = 0.5 * a0;
  c_[3] = (20 * h - 12 * v0 * T - 3 * a0 * T * T) / (2 * T * T * T);
  c_[4] = (-30 * h + 16 * v0 * T + 3 * a0 * T * T) / (2 * T * T * T * T);
  c_[5] = (12 * h - 6 * v0 * T - a0 * T * T) / (2 * T * T * T * T * T);
}

double Quintic::Position(double t) const {
  t = std::clamp(t, 0.0, duration_);
  return c_[0] + t * (c_[1] + t * (c_[2] + t * (c_[3] + t * (c_[4] + t * c_[5]))));
}

double Quintic::Velocity(double t) const {
  if (t >= duration_) return 0.0;
  t = std::max(t, 0.0);
  return c_[1] + t * (2 * c_[2] + t * (3 * c_[3] + t * (4 * c_[4] + t * 5 * c_[5])));
}

double Quintic::Acceleration(double t) const {
  if (t >= duration_) return 0.0;
  t = std::max(t, 0.0);
  return 2 * c_[2] + t * (6 * c_[3] + t * (12 * c_[4] + t * 20 * c_[5]));
}

ExpertController::ExpertController(const sim::SimParams& params,
                                   ExpertOptions options)
    : params_(params), options_(options) {}

void ExpertController::Reset(const sim::Episode& episode) {
  has_plan_ = false;
  closing_ = false;
  tried_ = false;
  plans_ = 0;
  hold_ = episode.world.arm.joints;
}

double ExpertController::PlanTime(const sim::WorldState& w) const {
  return w.time - plan_start_;
}

void ExpertController::Plan(const sim::WorldState& w) {
  tried_ = true;
  planned_velocity_ = w.target.velocity;
  const auto intercept = PredictIntercept(params_, w.target, w.arm, options_);
  std::array<double, sim::kNumJoints> v0{0, 0, 0}, a0{0, 0, 0};
  if (has_plan_) {
    const double t = PlanTime(w);
    for (int j = 0; j < sim::kNumJoints; ++j) {
      v0[j] = segments_[j].Velocity(t);
      a0[j] = segments_[j].Acceleration(t);
    }
  }
  if (!intercept) {
    has_plan_ = false;
    hold_ = w.arm.joints;
    return;
  }
  const double duration = std::max(intercept->time - options_.lead,
                                   options_.min_duration);
  for (int j = 0; j < sim::kNumJoints; ++j) {
    segments_[j] = Quintic(w.arm.joints[j], v0[j], a0[j], intercept->joints[j],
                           duration);
  }
  plan_start_ = w.time;
  has_plan_ = true;
  ++plans_;
}

sim::Command ExpertController::Act(const sim::Observation& obs) {
  if (obs.world == nullptr) throw InvariantError("expert needs the world state");
  const sim::WorldState& w = *obs.world;
  if (!w.captured &&
      (!tried_ || (w.target.velocity - planned_velocity_).norm() > 1e-12)) {
    Plan(w);
  }
  sim::Command cmd;
  if (has_plan_) {
    const double t = PlanTime(w) + params_.dt;
    for (int j = 0; j < sim::kNumJoints; ++j) cmd.joints[j] = segments_[j].Position(t);
  } else {
    cmd.joints = hold_;
  }
  const Vec2 ee = sim::EndEffector(params_.arm, w.arm.joints);
  if (w.captured ||
      (ee - w.target.GraspPoint()).norm() <= params_.capture_radius) {
    closing_ = true;
  }
  cmd.gripper = closing_ ? 0.0 : 1.0;
  return cmd;
}

}  // namespace ifcgrasp::expert
