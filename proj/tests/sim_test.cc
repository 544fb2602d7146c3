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

#include <cmath>
#include <cstring>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/numerics/rng.h"
#include "ifcgrasp/sim/kinematics.h"
#include "ifcgrasp/sim/render.h"
#include "ifcgrasp/sim/scenario.h"
#include "ifcgrasp/sim/world.h"

namespace ifcgrasp::sim {
namespace {

using num::Array;
using num::CounterRng;

TEST(StepTargetTest, ImpulseChangesVelocityByImpulseOverMass) {
  TargetState s;
  s.mass = 2.0;
  s.velocity = Vec2(0.003, -0.001);
  const TargetState n = StepTarget(s, Vec2(0.01, 0.0), 0.04);
  EXPECT_NEAR(n.velocity.x() - s.velocity.x(), 0.005, 1e-12);
  EXPECT_NEAR(n.velocity.y() - s.velocity.y(), 0.0, 1e-12);
}

TEST(StepTargetTest, MomentumMatchesImpulseSum) {
  CounterRng rng(3);
  TargetState s;
  s.mass = 1.7;
  const Vec2 v0 = s.velocity;
  Vec2 total = Vec2::Zero();
  for (int i = 0; i < 500; ++i) {
    const Vec2 j(rng.Uniform(-0.01, 0.01), rng.Uniform(-0.01, 0.01));
    total += j;
    s = StepTarget(s, j, 0.04);
  }
  EXPECT_LE((s.mass * s.velocity - s.mass * v0 - total).norm(), 1e-12);
}

TEST(StepTargetTest, GlidePreservesSpeedOverThousandSteps) {
  TargetState s;
  s.position = Vec2(0.6, 0.1);
  s.velocity = Vec2(-0.0087, 0.0041);
  s.angular_velocity = 0.07;
  const double speed = s.velocity.norm();
  const TargetState s0 = s;
  for (int i = 0; i < 1000; ++i) {
    s = StepTarget(s, Vec2::Zero(), 0.04);
    ASSERT_NEAR(s.velocity.norm(), speed, 1e-12);
  }
  EXPECT_NEAR((s.position - s0.position - 1000 * 0.04 * s0.velocity).norm(), 0.0,
              1e-12);
  EXPECT_NEAR(s.angle, 1000 * 0.04 * 0.07, 1e-12);
}

TEST(StepTargetTest, WallReflectsNormalVelocity) {
  Bounds b;
  TargetState s;
  s.position = Vec2(b.x_max - 0.5 * s.size - 0.001, 0.0);
  s.velocity = Vec2(0.1, 0.02);
  const TargetState n = StepTarget(s, Vec2::Zero(), 0.04, &b);
  EXPECT_DOUBLE_EQ(n.velocity.x(), -0.1);
  EXPECT_DOUBLE_EQ(n.velocity.y(), 0.02);
  EXPECT_LE(n.position.x(), b.x_max - 0.5 * s.size);
}

TEST(StepArmTest, CommandEqualToStateIsFixedPoint) {
  ArmParams arm;
  ArmState s;
  s.joints = {0.2, 1.0, -0.4};
  const ArmState n = StepArm(arm, s, s.joints, 1.0, 0.04);
  EXPECT_EQ(n.joints, s.joints);
  for (double v : n.velocities) EXPECT_EQ(v, 0.0);
}

TEST(StepArmTest, RateLimitedMoveIsExactlyMaxSpeedTimesDt) {
  ArmParams arm;
  ArmState s;
  s.joints = {0.0, 1.0, 0.0};
  const ArmState n = StepArm(arm, s, {1.0, 0.0, 0.001}, 1.0, 0.04);
  EXPECT_NEAR(n.joints[0], 0.02, 1e-15);
  EXPECT_NEAR(n.joints[1], 0.98, 1e-15);
  EXPECT_NEAR(n.joints[2], 0.001, 1e-15);
  for (double v : n.velocities) EXPECT_LE(std::abs(v), arm.max_speed + 1e-12);
}

TEST(StepArmTest, StaysWithinLimits) {
  ArmParams arm;
  ArmState s;
  s.joints = {arm.upper[0] - 0.005, 0.06, 0.0};
  const ArmState n = StepArm(arm, s, {3.0, -3.0, 0.0}, 0.0, 0.04);
  EXPECT_TRUE(WithinLimits(arm, n.joints));
  EXPECT_DOUBLE_EQ(n.joints[0], arm.upper[0]);
  EXPECT_DOUBLE_EQ(n.joints[1], arm.lower[1]);
}

TEST(StepArmTest, GripperSlews) {
  ArmParams arm;
  ArmState s;
  const ArmState n = StepArm(arm, s, s.joints, 0.0, 0.04);
  EXPECT_NEAR(n.gripper, 1.0 - arm.gripper_rate * 0.04, 1e-15);
  EXPECT_EQ(n.gripper_command, 0.0);
}

TEST(StepArmTest, NanCommandThrows) {
  ArmParams arm;
  ArmState s;
  EXPECT_THROW(StepArm(arm, s, {NAN, 0, 0}, 1.0, 0.04), NumericError);
  EXPECT_THROW(StepArm(arm, s, s.joints, NAN, 0.04), NumericError);
}

TEST(KinematicsTest, ZeroPoseReachesHalfMeter) {
  ArmParams arm;
  const Vec2 p = EndEffector(arm, {0, 0, 0});
  EXPECT_DOUBLE_EQ(p.x(), 0.5);
  EXPECT_DOUBLE_EQ(p.y(), 0.0);
}

TEST(KinematicsTest, InverseKinematicsRoundTrip) {
  ArmParams arm;
  CounterRng rng(11);
  int solved = 0;
  for (int i = 0; i < 500; ++i) {
    const double r = rng.Uniform(0.15, 0.48), b = rng.Uniform(-1.2, 1.2);
    const Vec2 p = r * Vec2(std::cos(b), std::sin(b));
    const double heading = b + rng.Uniform(-0.5, 0.5);
    const auto q = InverseKinematics(arm, p, heading);
    if (!q) continue;
    ++solved;
    EXPECT_TRUE(WithinLimits(arm, *q));
    EXPECT_LE((EndEffector(arm, *q) - p).norm(), 1e-9);
    EXPECT_NEAR(std::remainder(EndEffectorHeading(*q) - heading, 2 * M_PI), 0.0,
                1e-9);
  }
  EXPECT_GT(solved, 300);
}

TEST(KinematicsTest, JacobianMatchesFiniteDifferences) {
  ArmParams arm;
  const Joints q{0.3, 1.1, -0.6};
  const auto jac = PositionJacobian(arm, q);
  for (int j = 0; j < kNumJoints; ++j) {
    Joints a = q, b = q;
    a[j] += 1e-6;
    b[j] -= 1e-6;
    const Vec2 d = (EndEffector(arm, a) - EndEffector(arm, b)) / 2e-6;
    EXPECT_NEAR(d.x(), jac(0, j), 1e-8);
    EXPECT_NEAR(d.y(), jac(1, j), 1e-8);
  }
}

TEST(KinematicsTest, UnreachablePointHasNoSolution) {
  ArmParams arm;
  EXPECT_FALSE(InverseKinematics(arm, Vec2(0.7, 0.0), 0.0).has_value());
}

// Target resting on the end effector with the gripper closing.
WorldState ReadyToCapture(const SimParams& p, const Vec2& grasp_offset) {
  WorldState w;
  w.dt = p.dt;
  w.arm.joints = HomePose(p, Vec2::Zero());
  w.arm.gripper_command = 0.0;
  w.target.grasp_offset = grasp_offset;
  w.target.angle = 0.4;
  const Vec2 ee = EndEffector(p.arm, w.arm.joints);
  w.target.position = ee - (w.target.GraspPoint() - w.target.position) +
                      Vec2(0.005, 0.0);
  w.target.velocity = Vec2(-0.01, 0.0);
  return w;
}

TEST(CaptureTest, OpenGripperDoesNotCapture) {
  SimParams p;
  WorldState w = ReadyToCapture(p, Vec2::Zero());
  w.arm.gripper_command = 1.0;
  const StepEvents e = StepWorld(p, w, w.arm.joints, 1.0);
  EXPECT_FALSE(e.captured_now);
  EXPECT_FALSE(w.captured);
}

TEST(CaptureTest, OutsideRadiusDoesNotCapture) {
  SimParams p;
  WorldState w = ReadyToCapture(p, Vec2::Zero());
  w.target.position += Vec2(0.05, 0.0);
  const StepEvents e = StepWorld(p, w, w.arm.joints, 0.0);
  EXPECT_FALSE(e.captured_now);
}

TEST(CaptureTest, RigidAttachmentResidual) {
  SimParams p;
  WorldState w = ReadyToCapture(p, Vec2(0.03, -0.01));
  const StepEvents first = StepWorld(p, w, w.arm.joints, 0.0);
  ASSERT_TRUE(first.captured_now);
  CounterRng rng(5);
  const Joints home = w.arm.joints;
  for (int i = 0; i < 400; ++i) {
    Joints cmd = home;
    for (double& c : cmd) c += rng.Uniform(-0.4, 0.4);
    StepWorld(p, w, cmd, 0.0);
    ASSERT_LE((w.target.GraspPoint() - EndEffector(p.arm, w.arm.joints)).norm(),
              1e-9);
  }
}

TEST(CaptureTest, HaltedArmHaltsTarget) {
  SimParams p;
  WorldState w = ReadyToCapture(p, Vec2::Zero());
  StepWorld(p, w, w.arm.joints, 0.0);
  ASSERT_TRUE(w.captured);
  StepWorld(p, w, w.arm.joints, 0.0);
  EXPECT_LT(w.target.velocity.norm(), 1e-6);
}

TEST(CaptureTest, HoldTorqueIsJacobianTransposeOfInertialForce) {
  SimParams p;
  WorldState w = ReadyToCapture(p, Vec2::Zero());
  StepWorld(p, w, w.arm.joints, 0.0);
  const Vec2 v0 = w.target.velocity;
  Joints cmd = w.arm.joints;
  cmd[0] += 0.01;
  const StepEvents e = StepWorld(p, w, cmd, 0.0);
  const Vec2 f = w.target.mass * (w.target.velocity - v0) / p.dt;
  const auto jac = PositionJacobian(p.arm, w.arm.joints);
  for (int j = 0; j < kNumJoints; ++j) {
    EXPECT_NEAR(e.hold_torque[j], jac(0, j) * f.x() + jac(1, j) * f.y(), 1e-12);
  }
}

TEST(CaptureTest, KineticEnergyNonIncreasingWhileDecelerating) {
  SimParams p;
  WorldState w = ReadyToCapture(p, Vec2::Zero());
  StepWorld(p, w, w.arm.joints, 0.0);
  ASSERT_TRUE(w.captured);
  // Base joint ramps down from full speed.
  double rate = p.arm.max_speed;
  double prev = INFINITY;
  while (rate > 0) {
    Joints cmd = w.arm.joints;
    cmd[0] -= rate * p.dt;
    StepWorld(p, w, cmd, 0.0);
    const double energy = 0.5 * w.target.mass * w.target.velocity.squaredNorm();
    EXPECT_LE(energy, prev + 1e-15);
    prev = energy;
    rate -= 0.02;
  }
}

TEST(SpawnTest, StandardSpeedRangeAndHome) {
  SimParams p;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const Episode e = SpawnEpisode(ScenarioConfig::Standard(), p, seed);
    const double speed = e.world.target.velocity.norm();
    EXPECT_GE(speed, 0.006);
    EXPECT_LE(speed, 0.012);
    EXPECT_FALSE(e.world.captured);
    EXPECT_EQ(e.world.step, 0);
    const Vec2 ee = EndEffector(p.arm, e.world.arm.joints);
    EXPECT_NEAR(ee.x(), 0.28, 1e-12);
    EXPECT_NEAR(ee.y(), 0.0, 1e-12);
    // Moving toward the base within the cone.
    const Vec2 toward = -e.world.target.position.normalized();
    EXPECT_GE(toward.dot(e.world.target.velocity.normalized()),
              std::cos(M_PI / 6) - 1e-12);
  }
}

TEST(SpawnTest, MonteCarloSpeedFloorAndOffset) {
  SimParams p;
  const ScenarioConfig c = ScenarioConfig::MonteCarlo(Vec2(0.02, -0.03));
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const Episode e = SpawnEpisode(c, p, seed);
    EXPECT_GE(e.world.target.velocity.norm(), 0.0135);
    const Vec2 ee = EndEffector(p.arm, e.world.arm.joints);
    EXPECT_NEAR(ee.x(), 0.30, 1e-12);
    EXPECT_NEAR(ee.y(), -0.03, 1e-12);
  }
}

TEST(SpawnTest, SameSeedSameEpisode) {
  SimParams p;
  const ScenarioConfig c = ScenarioConfig::For(ScenarioKind::kCameraOcclusion);
  const Episode a = SpawnEpisode(c, p, 42), b = SpawnEpisode(c, p, 42);
  EXPECT_EQ(a.world.target.position, b.world.target.position);
  EXPECT_EQ(a.world.target.velocity, b.world.target.velocity);
  EXPECT_EQ(a.scenario.occluder, b.scenario.occluder);
  const Episode d = SpawnEpisode(c, p, 43);
  EXPECT_NE(a.world.target.position, d.world.target.position);
}

TEST(SpawnTest, PathMissingWorkspaceThrows) {
  SimParams p;
  ScenarioConfig c;
  c.spawn_radius_min = c.spawn_radius_max = 0.8;
  c.spawn_bearing = 0.0;
  c.cone_half_angle = 1.5;
  int thrown = 0;
  for (uint64_t seed = 0; seed < 60; ++seed) {
    try {
      SpawnEpisode(c, p, seed);
    } catch (const InvariantError&) {
      ++thrown;
    }
  }
  EXPECT_GT(thrown, 0);
  EXPECT_LT(thrown, 60);
}

TEST(SpawnTest, InvalidConfigRejected) {
  SimParams p;
  ScenarioConfig c;
  c.speed_min = 0.02;
  c.speed_max = 0.01;
  EXPECT_THROW(SpawnEpisode(c, p, 0), ConfigError);
  EXPECT_THROW(ParseScenario("underwater"), ConfigError);
  EXPECT_EQ(ParseScenario("target_maneuver"), ScenarioKind::kTargetManeuver);
}

TEST(ScenarioDynamicsTest, StandardIsIdentity) {
  SimParams p;
  Episode e = SpawnEpisode(ScenarioConfig::Standard(), p, 1);
  for (int i = 0; i < 300; ++i) {
    const WorldState before = e.world;
    EXPECT_FALSE(ApplyScenarioDynamics(p, e.world, e.scenario));
    EXPECT_EQ(before.target.velocity, e.world.target.velocity);
    StepWorld(p, e.world, e.world.arm.joints, 1.0);
  }
}

TEST(ScenarioDynamicsTest, ManeuverFiresOnceInMiddleThirdWithinSpeedRange) {
  SimParams p;
  const ScenarioConfig c = ScenarioConfig::For(ScenarioKind::kTargetManeuver);
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Episode e = SpawnEpisode(c, p, seed);
    int fired = 0;
    for (int i = 0; i < 625; ++i) {
      const Vec2 v = e.world.target.velocity;
      if (ApplyScenarioDynamics(p, e.world, e.scenario)) {
        ++fired;
        const double t = e.world.step * p.dt;
        EXPECT_GE(t, c.nominal_duration / 3 - p.dt);
        EXPECT_LE(t, 2 * c.nominal_duration / 3 + p.dt);
        EXPECT_GE(e.world.target.velocity.norm(), c.speed_min - 1e-15);
        EXPECT_LE(e.world.target.velocity.norm(), c.speed_max + 1e-15);
        EXPECT_NE(v, e.world.target.velocity);
      }
      StepWorld(p, e.world, e.world.arm.joints, 1.0);
    }
    EXPECT_EQ(fired, 1) << "seed " << seed;
  }
}

class RenderTest : public ::testing::Test {
 protected:
  Episode Spawn(ScenarioKind kind, uint64_t seed = 7) {
    return SpawnEpisode(ScenarioConfig::For(kind), params_, seed);
  }
  SimParams params_;
  std::vector<CameraSpec> cams_ = DefaultCameras(64, 80);
};

double Mean(const Array<float>& a) {
  double s = 0;
  for (int64_t i = 0; i < a.size(); ++i) s += a[i];
  return s / a.size();
}

TEST_F(RenderTest, RangeAndShape) {
  for (ScenarioKind k : AllScenarios()) {
    const Episode e = Spawn(k);
    const Array<float> all = RenderAll(params_, e.world, cams_, e.scenario);
    ASSERT_EQ(all.shape(), (num::Shape{3, 64, 80, 3}));
    for (int64_t i = 0; i < all.size(); ++i) {
      ASSERT_GE(all[i], 0.0f);
      ASSERT_LE(all[i], 1.0f);
    }
  }
}

TEST_F(RenderTest, BitIdenticalForSameStateAndSeed) {
  const Episode e = Spawn(ScenarioKind::kLowLight);
  const Array<float> a = RenderAll(params_, e.world, cams_, e.scenario);
  const Array<float> b = RenderAll(params_, e.world, cams_, e.scenario);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
  WorldState later = e.world;
  later.step = 1;
  const Array<float> c = RenderAll(params_, later, cams_, e.scenario);
  EXPECT_NE(std::memcmp(a.data(), c.data(), a.size() * sizeof(float)), 0);
}

TEST_F(RenderTest, TargetAndArmAreVisible) {
  const Episode e = Spawn(ScenarioKind::kStandard);
  EXPECT_GT(Mean(Render(params_, e.world, cams_[0], 0, e.scenario)), 0.16);
  // Hand-eye sees its own jaws.
  const Array<float> hand = Render(params_, e.world, cams_[2], 2, e.scenario);
  double green = 0;
  for (int64_t i = 0; i < hand.size(); i += 3) {
    green = std::max(green, static_cast<double>(hand[i + 1] - hand[i]));
  }
  EXPECT_GT(green, 0.4);
}

TEST_F(RenderTest, MovingTargetChangesGlobalView) {
  Episode e = Spawn(ScenarioKind::kStandard);
  const Array<float> a = Render(params_, e.world, cams_[0], 0, e.scenario);
  e.world.target.position += Vec2(-0.05, 0.0);
  const Array<float> b = Render(params_, e.world, cams_[0], 0, e.scenario);
  double diff = 0;
  for (int64_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - b[i]);
  EXPECT_GT(diff, 10.0);
}

TEST_F(RenderTest, LowLightDropsLuminanceBySixtyPercent) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Episode dark = Spawn(ScenarioKind::kLowLight, seed);
    EXPECT_GE(dark.scenario.gamma, 0.2);
    EXPECT_LE(dark.scenario.gamma, 0.4);
    Episode bright = dark;
    bright.scenario.config.kind = ScenarioKind::kStandard;
    for (int c = 0; c < 3; ++c) {
      const double m0 = Mean(Render(params_, bright.world, cams_[c], c, bright.scenario));
      const double m1 = Mean(Render(params_, dark.world, cams_[c], c, dark.scenario));
      EXPECT_LE(m1, 0.4 * m0) << "camera " << c;
    }
  }
}

TEST_F(RenderTest, GrayscaleChannelsEqual) {
  const Episode e = Spawn(ScenarioKind::kGrayscale);
  const Array<float> all = RenderAll(params_, e.world, cams_, e.scenario);
  for (int64_t i = 0; i < all.size(); i += 3) {
    ASSERT_EQ(all[i], all[i + 1]);
    ASSERT_EQ(all[i], all[i + 2]);
  }
}

TEST_F(RenderTest, CameraOcclusionDarkensOneCameraDuringWindow) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Episode e = Spawn(ScenarioKind::kCameraOcclusion, seed);
    const auto& s = e.scenario;
    ASSERT_GE(s.occluded_camera, 0);
    ASSERT_LT(s.occluded_camera, 3);
    ASSERT_LT(s.occlusion_begin, s.occlusion_end);
    e.world.step = s.occlusion_begin;
    for (int c = 0; c < 3; ++c) {
      const Array<float> img = Render(params_, e.world, cams_[c], c, s);
      int64_t black = 0;
      for (int64_t i = 0; i < img.size(); i += 3) {
        black += img[i] == 0.0f && img[i + 1] == 0.0f && img[i + 2] == 0.0f;
      }
      const double frac = static_cast<double>(black) / (64 * 80);
      if (c == s.occluded_camera) {
        EXPECT_GE(frac, 0.18);
        EXPECT_LE(frac, 0.52);
      } else {
        EXPECT_EQ(black, 0);
      }
    }
    e.world.step = s.occlusion_end;
    const Array<float> after =
        Render(params_, e.world, cams_[s.occluded_camera], s.occluded_camera, s);
    for (int64_t i = 0; i < after.size(); i += 3) {
      ASSERT_GT(after[i] + after[i + 1] + after[i + 2], 0.0f);
    }
  }
}

TEST_F(RenderTest, TargetOcclusionOnlyInGlobalViews) {
  Episode occ = Spawn(ScenarioKind::kTargetOcclusion);
  ASSERT_EQ(occ.scenario.strip.size(), 4u);
  Episode plain = occ;
  plain.scenario.strip.clear();
  for (int c = 0; c < 3; ++c) {
    const Array<float> a = Render(params_, occ.world, cams_[c], c, occ.scenario);
    const Array<float> b = Render(params_, plain.world, cams_[c], c, plain.scenario);
    double diff = 0;
    for (int64_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - b[i]);
    if (c < 2) {
      EXPECT_GT(diff, 1.0) << "camera " << c;
    } else {
      EXPECT_EQ(diff, 0.0);
    }
  }
}

TEST(CameraSpecTest, ExtentsMustDivideDownsample) {
  const auto cams = DefaultCameras(64, 80);
  ASSERT_EQ(cams.size(), 3u);
  EXPECT_EQ(cams[0].id, "global_1");
  EXPECT_EQ(cams[2].id, "hand_eye");
  EXPECT_NO_THROW(cams[0].Validate(16));
  EXPECT_THROW(DefaultCameras(60, 80)[0].Validate(16), ConfigError);
}

}  // namespace
}  // namespace ifcgrasp::sim
