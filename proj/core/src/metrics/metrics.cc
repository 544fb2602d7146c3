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

#include "ifcgrasp/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::metrics {

int JointTrajectory::num_joints() const {
  return angles.empty() ? 0 : static_cast<int>(angles[0].size());
}

void JointTrajectory::Validate(int min_samples) const {
  if (!(dt > 0)) throw ConfigError("trajectory dt must be positive");
  if (static_cast<int>(angles.size()) < min_samples) {
    throw InvariantError("trajectory needs at least " +
                         std::to_string(min_samples) + " samples, got " +
                         std::to_string(angles.size()));
  }
  for (const auto& row : angles) {
    if (static_cast<int>(row.size()) != num_joints()) {
      throw InvariantError("ragged joint trajectory");
    }
  }
}

namespace {

double Second(const JointTrajectory& x, size_t t, int j) {
  return x.angles[t + 1][j] - 2.0 * x.angles[t][j] + x.angles[t - 1][j];
}

}  // namespace

std::vector<double> Masd(const JointTrajectory& traj) {
  traj.Validate(3);
  const int nj = traj.num_joints();
  std::vector<double> out(nj, 0.0);
  const size_t n = traj.angles.size();
  for (int j = 0; j < nj; ++j) {
    double s = 0;
    for (size_t t = 1; t + 1 < n; ++t) s += std::abs(Second(traj, t, j));
    out[j] = s / static_cast<double>(n - 2) / (traj.dt * traj.dt);
  }
  return out;
}

std::vector<double> RmsJerk(const JointTrajectory& traj) {
  traj.Validate(4);
  const int nj = traj.num_joints();
  std::vector<double> out(nj, 0.0);
  const size_t n = traj.angles.size();
  const double dt3 = traj.dt * traj.dt * traj.dt;
  for (int j = 0; j < nj; ++j) {
    double s = 0;
    for (size_t t = 3; t < n; ++t) {
      const auto& a = traj.angles;
      const double d = (a[t][j] - 3.0 * a[t - 1][j] + 3.0 * a[t - 2][j] -
                        a[t - 3][j]) / dt3;
      s += d * d;
    }
    out[j] = std::sqrt(s / static_cast<double>(n - 3));
  }
  return out;
}

std::vector<double> MaxAbsAcceleration(const JointTrajectory& traj) {
  traj.Validate(3);
  const int nj = traj.num_joints();
  std::vector<double> out(nj, 0.0);
  for (int j = 0; j < nj; ++j) {
    for (size_t t = 1; t + 1 < traj.angles.size(); ++t) {
      out[j] = std::max(out[j], std::abs(Second(traj, t, j)) / (traj.dt * traj.dt));
    }
  }
  return out;
}

void SafetyLimits::Validate() const {
  if (!(torque_limit > 0)) throw ConfigError("torque limit must be positive");
  for (double a : max_acceleration) {
    if (!(a > 0)) throw ConfigError("acceleration limits must be positive");
  }
  for (double i : inertia) {
    if (!(i >= 0)) throw ConfigError("inertias must be non-negative");
  }
}

std::vector<double> ReactionTorque(const JointTrajectory& traj,
                                   const SafetyLimits& limits) {
  limits.Validate();
  const std::vector<double> alpha = MaxAbsAcceleration(traj);
  std::vector<double> out(alpha.size(), 0.0);
  for (size_t j = 0; j < alpha.size(); ++j) {
    const bool gated = j < limits.max_acceleration.size() &&
                       std::isfinite(limits.max_acceleration[j]);
    const double inertia = j < limits.inertia.size() ? limits.inertia[j] : 0.0;
    if (gated && inertia <= 0) {
      throw ConfigError("missing equivalent inertia for gated joint J" +
                        std::to_string(j + 1));
    }
    out[j] = inertia * alpha[j];
  }
  return out;
}

std::string FailureName(FailureReason reason) {
  switch (reason) {
    case FailureReason::kNone:
      return "none";
    case FailureReason::kNoGrasp:
      return "no_grasp";
    case FailureReason::kNotHalted:
      return "not_halted";
    case FailureReason::kMasdExceeded:
      return "masd_exceeded";
  }
  return "none";
}

SuccessRecord JudgeSuccess(const EpisodeLog& log, const SafetyLimits& limits,
                           double halt_eps, double time_limit) {
  limits.Validate();
  if (!log.complete) throw InvariantError("episode log is truncated");
  if (log.target_speed.size() != log.joints.angles.size()) {
    throw InvariantError("episode log streams have different lengths");
  }
  const double dt = log.joints.dt;
  SuccessRecord r;
  r.masd = Masd(log.joints);
  r.jerk = RmsJerk(log.joints);
  r.max_acceleration = MaxAbsAcceleration(log.joints);
  r.grasped = log.capture_step >= 0 &&
              log.capture_step < static_cast<int64_t>(log.target_speed.size());
  if (r.grasped) {
    for (size_t i = log.capture_step; i < log.target_speed.size(); ++i) {
      if (i * dt > time_limit + 1e-9) break;
      if (log.target_speed[i] < halt_eps) {
        r.halted = true;
        break;
      }
    }
  }
  r.masd_ok = true;
  for (size_t j = 0; j < r.masd.size() && j < limits.max_acceleration.size(); ++j) {
    if (r.masd[j] > limits.max_acceleration[j]) r.masd_ok = false;
  }
  if (!r.grasped) {
    r.reason = FailureReason::kNoGrasp;
  } else if (!r.halted) {
    r.reason = FailureReason::kNotHalted;
  } else if (!r.masd_ok) {
    r.reason = FailureReason::kMasdExceeded;
  } else {
    r.reason = FailureReason::kNone;
  }
  return r;
}

DivergenceCurve ClusterDivergence(const std::vector<ChunkPrediction>& chunks,
                                  int dims) {
  std::map<int64_t, std::vector<const std::vector<double>*>> by_step;
  for (const ChunkPrediction& c : chunks) {
    for (size_t i = 0; i < c.actions.size(); ++i) {
      if (static_cast<int>(c.actions[i].size()) < dims) {
        throw ShapeError("chunk action narrower than divergence dims");
      }
      by_step[c.step + static_cast<int64_t>(i)].push_back(&c.actions[i]);
    }
  }
  DivergenceCurve out;
  for (const auto& [step, preds] : by_step) {
    std::vector<double> mean(dims, 0.0);
    for (const auto* p : preds) {
      for (int d = 0; d < dims; ++d) mean[d] += (*p)[d];
    }
    for (double& m : mean) m /= static_cast<double>(preds.size());
    double spread = 0;
    for (const auto* p : preds) {
      double s = 0;
      for (int d = 0; d < dims; ++d) s += ((*p)[d] - mean[d]) * ((*p)[d] - mean[d]);
      spread += std::sqrt(s);
    }
    out.steps.push_back(step);
    out.values.push_back(spread / static_cast<double>(preds.size()));
  }
  if (!out.values.empty()) {
    double s = 0;
    for (double v : out.values) s += v;
    out.mean = s / static_cast<double>(out.values.size());
  }
  return out;
}

}  // namespace ifcgrasp::metrics
