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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/expert/dataset.h"
#include "ifcgrasp/expert/expert.h"
#include "ifcgrasp/io/container.h"
#include "ifcgrasp/metrics/metrics.h"
#include "ifcgrasp/numerics/rng.h"
#include "ifcgrasp/sim/kinematics.h"

namespace ifcgrasp::expert {
namespace {

namespace fs = std::filesystem;
using num::CounterRng;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ifcgrasp_expert_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

TEST(InterceptTest, AxialApproachMeetsReachCircleAtTenSeconds) {
  sim::SimParams p;
  p.arm.lower[1] = 0.0;  // full stretch allowed: reach 0.5 m
  sim::TargetState target;
  target.position = Vec2(0.6, 0.0);
  target.velocity = Vec2(-0.01, 0.0);
  sim::ArmState arm;
  arm.joints = {0.0, 0.0, 0.0};
  const auto hit = PredictIntercept(p, target, arm);
  ASSERT_TRUE(hit.has_value());
  EXPECT_NEAR(hit->time, 10.0, 1e-9);
  EXPECT_NEAR(hit->point.x(), 0.5, 1e-9);
  EXPECT_NEAR(hit->point.y(), 0.0, 1e-12);
}

TEST(InterceptTest, StationaryTargetIsInterceptedWhereItIs) {
  sim::SimParams p;
  sim::TargetState target;
  target.position = Vec2(0.35, 0.1);
  sim::ArmState arm;
  arm.joints = sim::HomePose(p, Vec2::Zero());
  const ExpertOptions o;
  const auto hit = PredictIntercept(p, target, arm, o);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->point, target.position);
  double amplitude = 0;
  for (int j = 0; j < 3; ++j) {
    amplitude = std::max(amplitude, std::abs(hit->joints[j] - arm.joints[j]));
  }
  const double travel = MinimumDuration(p.arm, amplitude, o);
  EXPECT_GE(hit->time, travel + o.lead - 1e-9);
  EXPECT_LE(hit->time, travel + o.lead + p.dt + 1e-9);
}

TEST(InterceptTest, TangentialOutwardMotionHasNoIntercept) {
  sim::SimParams p;
  sim::TargetState target;
  target.position = Vec2(0.5, 0.0);
  target.velocity = Vec2(0.0, 0.01);
  sim::ArmState arm;
  arm.joints = sim::HomePose(p, Vec2::Zero());
  EXPECT_FALSE(PredictIntercept(p, target, arm).has_value());
}

TEST(QuinticTest, RestToRestBoundaryConditions) {
  const Quintic q(0.3, 0.0, 0.0, -0.9, 4.0);
  EXPECT_DOUBLE_EQ(q.Position(0.0), 0.3);
  EXPECT_NEAR(q.Position(4.0), -0.9, 1e-12);
  EXPECT_NEAR(q.Position(9.0), -0.9, 1e-12);
  for (double t : {0.0, 4.0}) {
    EXPECT_NEAR(q.Velocity(t), 0.0, 1e-12);
    EXPECT_NEAR(q.Acceleration(t), 0.0, 1e-12);
  }
  // Min-jerk peak speed at the midpoint.
  EXPECT_NEAR(std::abs(q.Velocity(2.0)), 1.875 * 1.2 / 4.0, 1e-12);
}

TEST(QuinticTest, MatchesInitialStateAndDerivatives) {
  const Quintic q(0.1, 0.2, -0.05, 0.7, 2.5);
  EXPECT_NEAR(q.Velocity(0.0), 0.2, 1e-12);
  EXPECT_NEAR(q.Acceleration(0.0), -0.05, 1e-12);
  EXPECT_NEAR(q.Position(2.5), 0.7, 1e-12);
  EXPECT_NEAR(q.Velocity(2.5 - 1e-12), 0.0, 1e-9);
  EXPECT_NEAR(q.Acceleration(2.5 - 1e-12), 0.0, 1e-9);
  for (double t : {0.3, 1.1, 2.0}) {
    const double h = 1e-5;
    EXPECT_NEAR((q.Position(t + h) - q.Position(t - h)) / (2 * h), q.Velocity(t), 1e-8);
    EXPECT_NEAR((q.Velocity(t + h) - q.Velocity(t - h)) / (2 * h), q.Acceleration(t), 1e-8);
  }
  EXPECT_THROW(Quintic(0, 0, 0, 1, 0.0), InvariantError);
}

TEST(QuinticTest, MeanAbsoluteAccelerationBound) {
  // Mean |acceleration| of a rest-to-rest quintic is 3.75 A / T^2.
  const double a = 0.8, t_end = 5.0;
  const Quintic q(0.0, 0.0, 0.0, a, t_end);
  const int n = 200000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += std::abs(q.Acceleration((i + 0.5) * t_end / n));
  EXPECT_NEAR(s / n, 3.75 * a / (t_end * t_end), 1e-6);
}

TEST(InverseKinematicsOracleTest, TwoLinkPlusWristRoundTrip) {
  sim::ArmParams arm;
  CounterRng rng(19);
  for (int i = 0; i < 300; ++i) {
    const double r = rng.Uniform(0.2, 0.45), b = rng.Uniform(-1.0, 1.0);
    const Vec2 p = r * Vec2(std::cos(b), std::sin(b));
    const auto q = sim::InverseKinematics(arm, p, b);
    if (!q) continue;
    // Independent law-of-cosines elbow angle for the wrist point.
    const Vec2 wrist = p - arm.links[2] * Vec2(std::cos(b), std::sin(b));
    const double elbow = M_PI - std::acos((0.04 + 0.04 - wrist.squaredNorm()) / 0.08);
    EXPECT_NEAR((*q)[1], elbow, 1e-9);
    EXPECT_LE((sim::EndEffector(arm, *q) - p).norm(), 1e-9);
  }
}

TEST(ExpertTest, StandardSuccessGateOverTwoHundredEpisodes) {
  sim::SimParams p;
  int ok = 0, headroom = 0;
  for (int s = 0; s < 200; ++s) {
    const sim::Episode e = sim::SpawnEpisode(sim::ScenarioConfig::Standard(), p, s);
    ExpertController c(p);
    const auto r = sim::Rollout(p, e, c);
    const auto rec = metrics::JudgeSuccess(r.log);
    ok += rec.success();
    headroom += *std::max_element(rec.masd.begin(), rec.masd.end()) <= 0.089;
  }
  EXPECT_GE(ok, 190);
  EXPECT_GE(headroom, 190);
}

TEST(ExpertTest, ReplansOnManeuverAndStillSucceeds) {
  sim::SimParams p;
  int ok = 0;
  for (int s = 0; s < 20; ++s) {
    const sim::Episode e = sim::SpawnEpisode(
        sim::ScenarioConfig::For(sim::ScenarioKind::kTargetManeuver), p, s);
    ExpertController c(p);
    const auto r = sim::Rollout(p, e, c);
    ok += metrics::JudgeSuccess(r.log).success();
    // One plan at spawn, one after the velocity change unless the target was
    // already captured.
    EXPECT_GE(c.plans(), 1);
    EXPECT_LE(c.plans(), 2);
  }
  EXPECT_GE(ok, 18);
}

TEST(ExpertTest, CommandsStayWithinRateLimit) {
  sim::SimParams p;
  const sim::Episode e = sim::SpawnEpisode(sim::ScenarioConfig::Standard(), p, 3);
  ExpertController c(p);
  const auto r = sim::Rollout(p, e, c);
  for (const auto& s : r.steps) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_LE(std::abs(s.command.joints[j] - s.state.arm.joints[j]),
                p.arm.max_speed * p.dt + 1e-12);
    }
  }
}

DatasetOptions Small(int n) {
  DatasetOptions o;
  o.episodes = n;
  o.seed = 5;
  return o;
}

TEST(DatasetTest, AllStoredDemosPassTheGate) {
  const Dataset ds = GenerateDataset(Small(6));
  ASSERT_EQ(ds.episodes.size(), 6u);
  EXPECT_GE(ds.attempts, 6);
  for (const DemoEpisode& ep : ds.episodes) {
    EXPECT_GE(ep.capture_step, 0);
    EXPECT_GE(ep.halt_step, 0);
    for (double m : ep.masd) EXPECT_LE(m, 0.089);
    EXPECT_EQ(ep.actions.shape(), (num::Shape{ep.length(), 4}));
    // Proprio at t+1 equals the commanded joints at t when within rate.
    for (int t = 0; t + 1 < ep.length(); ++t) {
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(ep.proprio.at(t + 1, j), ep.actions.at(t, j), 1e-6);
      }
    }
  }
}

TEST(DatasetTest, SameSeedGivesIdenticalBytes) {
  const fs::path a = TempDir("a"), b = TempDir("b");
  SaveDataset(GenerateDataset(Small(3)), a);
  SaveDataset(GenerateDataset(Small(3)), b);
  int files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(Slurp(entry.path()), Slurp(b / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 1 + 3 * 5);
}

TEST(DatasetTest, ManifestCountMatchesDirectoriesAndRoundTrips) {
  const fs::path dir = TempDir("roundtrip");
  const Dataset ds = GenerateDataset(Small(4));
  SaveDataset(ds, dir);
  int dirs = 0;
  for (const auto& entry : fs::directory_iterator(dir)) dirs += entry.is_directory();
  const Dataset back = LoadDataset(dir);
  EXPECT_EQ(back.episodes.size(), static_cast<size_t>(dirs));
  EXPECT_EQ(back.config_hash, ds.config_hash);
  for (size_t i = 0; i < ds.episodes.size(); ++i) {
    const auto& x = ds.episodes[i].states;
    const auto& y = back.episodes[i].states;
    ASSERT_EQ(x.shape(), y.shape());
    EXPECT_EQ(std::memcmp(x.data(), y.data(), x.size() * sizeof(float)), 0);
    EXPECT_EQ(ds.episodes[i].seed, back.episodes[i].seed);
  }
}

TEST(DatasetTest, StoredFramesEqualRerenderedFrames) {
  DatasetOptions o = Small(1);
  const Dataset plain = GenerateDataset(o);
  o.store_images = true;
  const Dataset stored = GenerateDataset(o);
  ASSERT_GT(stored.episodes[0].images.size(), 0);
  for (int t : {0, 10, plain.episodes[0].length() - 1}) {
    const num::Array<float> a = EpisodeFrames(plain, 0, t);
    const num::Array<float> b = EpisodeFrames(stored, 0, t);
    ASSERT_EQ(a.shape(), (num::Shape{3, 64, 80, 3}));
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
  }
}

TEST(DatasetTest, TruncatedBlobNamesTheStream) {
  const fs::path dir = TempDir("truncated");
  SaveDataset(GenerateDataset(Small(1)), dir);
  const fs::path blob = dir / "episode_0000" / "actions.f32";
  fs::resize_file(blob, fs::file_size(blob) - 4);
  try {
    LoadDataset(dir);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("actions"), std::string::npos) << e.what();
  }
}

TEST(DatasetTest, ConfigMismatchIsRefusedWithDiff) {
  const fs::path dir = TempDir("mismatch");
  SaveDataset(GenerateDataset(Small(1)), dir);
  DatasetOptions other = Small(1);
  other.sim.capture_radius = 0.03;
  const nlohmann::json want = other.ToJson();
  try {
    LoadDataset(dir, &want);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("capture_radius"), std::string::npos) << e.what();
  }
  const nlohmann::json same = Small(1).ToJson();
  EXPECT_NO_THROW(LoadDataset(dir, &same));
}

TEST(DatasetTest, OptionsJsonRoundTrip) {
  DatasetOptions o = Small(7);
  o.scenario = sim::ScenarioKind::kLowLight;
  o.sim.arm.max_speed = 0.4;
  const DatasetOptions back = DatasetOptions::FromJson(o.ToJson());
  EXPECT_EQ(back.ToJson(), o.ToJson());
  nlohmann::json bad = o.ToJson();
  bad.erase("sim");
  EXPECT_THROW(DatasetOptions::FromJson(bad), ConfigError);
}

TEST(ContainerTest, ChecksumMismatchDetected) {
  const fs::path dir = TempDir("checksum");
  num::Array<float> a({2, 3});
  for (int i = 0; i < 6; ++i) a[i] = 0.5f * i;
  {
    io::ContainerWriter w(dir, "probe");
    w.Put("x", a);
    w.meta()["note"] = "hi";
    w.Finish();
  }
  io::ContainerReader r(dir, "probe");
  const num::Array<float> b = r.Get("x");
  EXPECT_EQ(b.shape(), a.shape());
  EXPECT_EQ(std::memcmp(a.data(), b.data(), 6 * sizeof(float)), 0);
  EXPECT_THROW(io::ContainerReader(dir, "dataset"), IoError);
  {
    std::fstream f(dir / "x.f32", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    f.put('\x7f');
  }
  EXPECT_THROW(r.Get("x"), IoError);
  EXPECT_THROW(r.Get("missing"), IoError);
}

TEST(ContainerTest, FnvKnownVectors) {
  EXPECT_EQ(io::HexDigest(io::Fnv1a("", 0)), "cbf29ce484222325");
  EXPECT_EQ(io::HexDigest(io::Fnv1a("a", 1)), "af63dc4c8601ec8c");
  EXPECT_EQ(io::HexDigest(io::Fnv1a("foobar", 6)), "85944171f73967e8");
}

}  // namespace
}  // namespace ifcgrasp::expert
