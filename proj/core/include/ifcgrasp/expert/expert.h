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

#ifndef IFCGRASP_EXPERT_EXPERT_H_
#define IFCGRASP_EXPERT_EXPERT_H_

#include <array>
#include <optional>

#include "ifcgrasp/sim/rollout.h"
#include "ifcgrasp/sim/types.h"

namespace ifcgrasp::expert {

using sim::Joints;
using sim::Vec2;

struct ExpertOptions {
  double lead = 0.5;         // arrive this long before the target, s
  double horizon = 20.0;     // intercept search window, s
  double masd_budget = 0.089;  // per-joint acceleration budget, rad/s^2
  double speed_margin = 0.95;  // fraction of the joint speed limit used
  double min_duration = 0.4;   // shortest move, s
};

struct Intercept {
  Vec2 point = Vec2::Zero();
  double time = 0;  // from now, s
  Joints joints{0, 0, 0};
};

// Shortest quintic duration moving `amplitude` rad within the speed limit and
// keeping the mean absolute acceleration over the move under the budget.
double MinimumDuration(const sim::ArmParams& arm, double amplitude,
                       const ExpertOptions& options);

// Earliest time on the dt grid at which the constant-velocity extrapolation
// of the grasp point is reachable (radial heading) and the arm can get there
// `lead` seconds early.
std::optional<Intercept> PredictIntercept(const sim::SimParams& params,
                                          const sim::TargetState& target,
                                          const sim::ArmState& arm,
                                          const ExpertOptions& options = {});

// Fifth-order polynomial from (q0, v0, a0) to (qf, 0, 0) over duration T.
class Quintic {
 public:
  Quintic() = default;
  Quintic(double q0, double v0, double a0, double qf, double duration);

  double Position(double t) const;
  double Velocity(double t) const;
  double Acceleration(double t) const;
  double duration() const { return duration_; }

 private:
  std::array<double, 6> c_{0, 0, 0, 0, 0, 0};
  double duration_ = 0;
};

// Privileged scripted demonstrator.
class ExpertController : public sim::Controller {
 public:
  ExpertController(const sim::SimParams& params, ExpertOptions options = {});

  void Reset(const sim::Episode& episode) override;
  sim::Command Act(const sim::Observation& obs) override;

  // Number of (re)plans this episode.
  int plans() const { return plans_; }
  bool has_intercept() const { return has_plan_; }

 private:
  void Plan(const sim::WorldState& w);
  double PlanTime(const sim::WorldState& w) const;

  sim::SimParams params_;
  ExpertOptions options_;
  std::array<Quintic, sim::kNumJoints> segments_;
  double plan_start_ = 0;
  Vec2 planned_velocity_ = Vec2::Zero();
  bool has_plan_ = false;
  bool closing_ = false;
  bool tried_ = false;
  int plans_ = 0;
  Joints hold_{0, 0, 0};
};

}  // namespace ifcgrasp::expert

#endif  // IFCGRASP_EXPERT_EXPERT_H_
