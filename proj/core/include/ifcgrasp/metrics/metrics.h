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

#ifndef IFCGRASP_METRICS_METRICS_H_
#define IFCGRASP_METRICS_METRICS_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ifcgrasp::metrics {

// angles[t][j], sampled every dt seconds.
struct JointTrajectory {
  std::vector<std::vector<double>> angles;
  double dt = 0.04;

  int num_joints() const;
  void Validate(int min_samples) const;
};

// Mean absolute second difference per joint, rad/s^2. Needs >= 3 samples.
std::vector<double> Masd(const JointTrajectory& traj);
// RMS of the backward third difference per joint, rad/s^3. Needs >= 4 samples.
std::vector<double> RmsJerk(const JointTrajectory& traj);
// max_t |second difference| / dt^2 per joint.
std::vector<double> MaxAbsAcceleration(const JointTrajectory& traj);

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

struct SafetyLimits {
  // Per-joint acceleration gates; kUnlimited for distal joints.
  std::vector<double> max_acceleration{0.178, 0.255, kUnlimited};
  double torque_limit = 0.1;  // reaction wheel, N m
  // Equivalent inertias backed out as torque_limit / max_acceleration; 0
  // marks joints without one.
  std::vector<double> inertia{0.1 / 0.178, 0.1 / 0.255, 0.0};
  double satellite_mass = 300.0;  // context only

  void Validate() const;
};

// max_t I_eq,j |alpha_j(t)|. Throws ConfigError if a gated joint lacks an
// inertia.
std::vector<double> ReactionTorque(const JointTrajectory& traj,
                                   const SafetyLimits& limits);

enum class FailureReason { kNone, kNoGrasp, kNotHalted, kMasdExceeded };
std::string FailureName(FailureReason reason);

// Sample i describes the world at time i * dt.
struct EpisodeLog {
  JointTrajectory joints;
  std::vector<double> target_speed;
  int64_t capture_step = -1;  // first sample with the target attached
  bool complete = false;      // rollout reached its stopping rule
};

struct SuccessRecord {
  bool grasped = false;
  bool halted = false;
  bool masd_ok = false;
  std::vector<double> masd;
  std::vector<double> jerk;
  std::vector<double> max_acceleration;
  FailureReason reason = FailureReason::kNoGrasp;

  bool success() const { return grasped && halted && masd_ok; }
};

// Throws InvariantError on an incomplete or inconsistent log.
SuccessRecord JudgeSuccess(const EpisodeLog& log, const SafetyLimits& limits = {},
                           double halt_eps = 1e-3, double time_limit = 25.0);

struct ChunkPrediction {
  int64_t step = 0;                          // emission step
  std::vector<std::vector<double>> actions;  // [k][dims], entry i targets step+i
};

struct DivergenceCurve {
  std::vector<int64_t> steps;
  std::vector<double> values;
  double mean = 0;
};

// Spread of all predictions targeting the same step around their mean,
// using the first dims action components.
DivergenceCurve ClusterDivergence(const std::vector<ChunkPrediction>& chunks,
                                  int dims);

}  // namespace ifcgrasp::metrics

#endif  // IFCGRASP_METRICS_METRICS_H_
