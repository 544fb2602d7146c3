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

#include "ifcgrasp/harness/run.h"

#include <algorithm>
#include <filesystem>
#include <memory>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/harness/serialize.h"
#include "ifcgrasp/io/container.h"

namespace ifcgrasp::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path Scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("ifcgrasp_harness_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig Tiny() {
  return RunConfig::FromJson(json::parse(R"({
    "dataset": {"episodes": 2, "seed": 5},
    "train": {"steps": 3, "batch_size": 2, "seed": 1, "init_seed": 2},
    "eval": {"episodes": 1, "seed": 77, "scenarios": ["standard"]}
  })"));
}

expert::Dataset TinyData(const RunConfig& c) { return expert::GenerateDataset(c.dataset); }

TEST(RunConfigTest, RejectsUnknownKeys) {
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"train": {"stepz": 1}})")), ConfigError);
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"policy": {"chunk_sise": 1}})")),
               ConfigError);
}

TEST(RunConfigTest, RejectsBadValues) {
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"preset": "huge"})")), ConfigError);
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"train": {"steps": "many"}})")),
               ConfigError);
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"eval": {"scenarios": ["fog"]}})")),
               ConfigError);
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"montecarlo": {"rows": 0}})")),
               ConfigError);
  EXPECT_THROW(RunConfig::FromJson(json::parse(R"({"montecarlo": {"axes": "diag"}})")),
               ConfigError);
}

TEST(RunConfigTest, PaperPresetIsShapeOnly) {
  const RunConfig c = RunConfig::FromJson(json::parse(R"({"preset": "paper"})"));
  EXPECT_EQ(c.Policy(false).image_height, 480);
  EXPECT_THROW(c.RequireRunnable(), ConfigError);
}

TEST(RunConfigTest, JsonRoundTrip) {
  const RunConfig a = Tiny();
  const RunConfig b = RunConfig::FromJson([&] {
    json j = a.ToJson();
    // Dataset image extents are derived from the policy.
    j["dataset"].erase("image_height");
    j["dataset"].erase("image_width");
    for (const char* k : {"sim", "expert", "rollout", "demo_masd_limit"}) j["dataset"].erase(k);
    return j;
  }());
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
}

TEST(RunConfigTest, DisableCorrelationFlag) {
  const RunConfig c = Tiny();
  EXPECT_TRUE(c.Policy(false).use_correlation);
  EXPECT_FALSE(c.Policy(true).use_correlation);
}

TEST(RunConfigTest, MissingFileIsIoError) {
  EXPECT_THROW(LoadRunConfig("/nonexistent/run.json"), IoError);
}

TEST(CheckpointTest, SaveLoadPredictsIdentically) {
  const RunConfig c = Tiny();
  const expert::Dataset ds = TinyData(c);
  TrainResult t = TrainPolicy(c, ds, false);
  const fs::path dir = Scratch("ckpt");
  SaveCheckpoint(dir, *t.policy, t.norm, {{"run", "test"}}, t.curve);
  const Checkpoint back = LoadCheckpoint(dir);
  EXPECT_EQ(back.provenance.at("run"), "test");
  EXPECT_EQ(PolicyConfigToJson(back.config).dump(), PolicyConfigToJson(t.policy->config()).dump());
  DemoSource src(ds, t.norm, t.policy->config());
  const policy::TrainingSample s = src.Get(0, 10);
  const num::Array<float> a = t.policy->Predict(s.input);
  const num::Array<float> b = back.policy->Predict(s.input);
  ASSERT_EQ(a.shape(), b.shape());
  for (int64_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_EQ(back.hash.size(), 16u);
  fs::remove_all(dir);
}

TEST(DemoSourceTest, RelativeTargetsRestoreDemoActions) {
  const RunConfig c = Tiny();
  const expert::Dataset ds = TinyData(c);
  const expert::DemoEpisode& ep = ds.episodes[0];
  for (bool relative : {true, false}) {
    policy::PolicyConfig pc = c.Policy(false);
    pc.relative_actions = relative;
    const Normalizers n = FitNormalizers(ds, pc);
    const policy::TrainingSample s = DemoSource(ds, n, pc).Get(0, 7);
    for (int i = 0; i < pc.chunk; ++i) {
      std::vector<double> row(sim::kActionDim);
      for (int k = 0; k < sim::kActionDim; ++k) row[k] = s.actions.at(i, k);
      row = n.actions.Denormalize(row);
      const int t = std::min(7 + i, ep.length() - 1);
      for (int k = 0; k < sim::kActionDim; ++k) {
        const double base = relative && k < sim::kNumJoints ? ep.proprio.at(7, k) : 0.0;
        EXPECT_NEAR(row[k] + base, ep.actions.at(t, k), 1e-5) << relative << " " << i;
      }
    }
  }
}

TEST(CheckpointTest, ShapeMismatchIsIoError) {
  const RunConfig c = Tiny();
  policy::ActPolicy<float> p(c.Policy(false), 1);
  Normalizers n;
  n.proprio = n.actions = policy::Normalizer{std::vector<double>(4, 0.0), std::vector<double>(4, 1.0)};
  const fs::path dir = Scratch("ckpt_bad");
  SaveCheckpoint(dir, p, n, json::object(), {});
  // Rewrite the manifest so the model is built without correlation.
  json m = json::parse(io::ReadTextFile(dir / "manifest.json"));
  m["meta"]["policy"]["use_correlation"] = false;
  io::WriteTextFile(dir / "manifest.json", m.dump());
  EXPECT_THROW(LoadCheckpoint(dir), IoError);
  fs::remove_all(dir);
}

TEST(EvaluateTest, ExpertMeetsGate) {
  sim::SimParams params;
  const ScenarioSummary s = EvaluateScenario(params, sim::ScenarioConfig::Standard(), 40, 9,
                                             ExpertFactory(params), sim::RolloutOptions{});
  ASSERT_EQ(s.episodes.size(), 40u);
  EXPECT_GE(s.success_rate(), 0.95);
  const json j = s.ToJson();
  EXPECT_EQ(j.at("episodes"), 40);
  int total = 0;
  for (const auto& [k, v] : j.at("reasons").items()) total += v.get<int>();
  EXPECT_EQ(total, 40);
  EXPECT_EQ(j.at("masd_median").size(), 3u);
}

TEST(EvaluateTest, ReportIsByteDeterministic) {
  sim::SimParams params;
  auto run = [&](const fs::path& dir) {
    const ScenarioSummary s = EvaluateScenario(params, sim::ScenarioConfig::For(
                                                   sim::ScenarioKind::kTargetManeuver),
                                               4, 3, ExpertFactory(params), {});
    WriteEvalReport(dir, {s}, {{"seed", 3}});
  };
  const fs::path a = Scratch("eval_a"), b = Scratch("eval_b");
  run(a);
  run(b);
  EXPECT_EQ(io::ReadTextFile(a / "report.json"), io::ReadTextFile(b / "report.json"));
  EXPECT_EQ(io::ReadTextFile(a / "metrics.csv"), io::ReadTextFile(b / "metrics.csv"));
  const json r = json::parse(io::ReadTextFile(a / "report.json"));
  EXPECT_TRUE(r.at("reference").contains("note"));
  EXPECT_EQ(r.at("divergence_space"), "joint");
  // One CSV row per episode per joint, plus the header.
  const std::string csv = io::ReadTextFile(a / "metrics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 3);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(EvaluateTest, PolicyEpisodeRecordsDivergence) {
  const RunConfig c = Tiny();
  const expert::Dataset ds = TinyData(c);
  TrainResult t = TrainPolicy(c, ds, false);
  sim::SimParams params;
  const ScenarioSummary s =
      EvaluateScenario(params, sim::ScenarioConfig::Standard(), 1, 4,
                       PolicyFactory(*t.policy, t.norm),
                       PolicyRolloutOptions(t.policy->config()));
  ASSERT_EQ(s.episodes.size(), 1u);
  EXPECT_FALSE(s.episodes[0].divergence_curve.empty());
  EXPECT_GE(s.episodes[0].divergence, 0.0);
}

TEST(MonteCarloTest, FiveByFiveGrid) {
  sim::SimParams params;
  MonteCarloConfig mc;
  mc.episodes_per_cell = 1;
  const std::vector<GridCell> cells = RunMonteCarlo(params, mc, ExpertFactory(params), {});
  ASSERT_EQ(cells.size(), 25u);
  EXPECT_DOUBLE_EQ(cells.front().row_value, -mc.lateral);
  EXPECT_DOUBLE_EQ(cells.back().col_value, mc.longitudinal);
  for (const auto& c : cells) {
    EXPECT_EQ(c.episodes, 1);
    EXPECT_LE(c.successes, c.episodes);
  }
  const fs::path dir = Scratch("grid");
  WriteGridReport(dir, cells, mc, json::object());
  const json g = json::parse(io::ReadTextFile(dir / "grid.json"));
  EXPECT_EQ(g.at("cells").size(), 25u);
  fs::remove_all(dir);
}

TEST(MonteCarloTest, SpeedBinsPartitionRange) {
  sim::SimParams params;
  MonteCarloConfig mc;
  mc.axes = "target_offset_speed";
  mc.scenario = "grayscale";
  mc.rows = 2;
  mc.cols = 3;
  mc.episodes_per_cell = 1;
  const std::vector<GridCell> cells = RunMonteCarlo(params, mc, ExpertFactory(params), {});
  ASSERT_EQ(cells.size(), 6u);
  const double w = (mc.speed_max - mc.speed_min) / 3;
  EXPECT_NEAR(cells[0].col_value, mc.speed_min + 0.5 * w, 1e-12);
  EXPECT_NEAR(cells[2].col_value, mc.speed_max - 0.5 * w, 1e-12);
  EXPECT_DOUBLE_EQ(cells[0].row_value, -mc.bearing);
}

}  // namespace
}  // namespace ifcgrasp::harness
