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

#include "ifcgrasp/expert/dataset.h"

#include <algorithm>
#include <cstdio>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/io/container.h"
#include "ifcgrasp/metrics/metrics.h"
#include "ifcgrasp/numerics/rng.h"
#include "ifcgrasp/sim/render.h"

namespace ifcgrasp::expert {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> Vec(const sim::Joints& j) { return {j.begin(), j.end()}; }

sim::Joints JointsFrom(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != sim::kNumJoints) throw ConfigError("expected 3 joint values");
  return {v[0], v[1], v[2]};
}

template <typename T>
T Field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing config field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field '") + key + "': " + e.what());
  }
}

}  // namespace

json SimParamsJson(const sim::SimParams& p) {
  return {{"dt", p.dt},
          {"capture_radius", p.capture_radius},
          {"target_mass", p.target_mass},
          {"target_size", p.target_size},
          {"bounds", {p.bounds.x_min, p.bounds.x_max, p.bounds.y_min, p.bounds.y_max}},
          {"arm",
           {{"links", Vec(p.arm.links)},
            {"lower", Vec(p.arm.lower)},
            {"upper", Vec(p.arm.upper)},
            {"max_speed", p.arm.max_speed},
            {"gripper_rate", p.arm.gripper_rate}}}};
}

sim::SimParams SimParamsFromJson(const json& j) {
  sim::SimParams p;
  p.dt = Field<double>(j, "dt");
  p.capture_radius = Field<double>(j, "capture_radius");
  p.target_mass = Field<double>(j, "target_mass");
  p.target_size = Field<double>(j, "target_size");
  const auto b = Field<std::vector<double>>(j, "bounds");
  if (b.size() != 4) throw ConfigError("bounds needs 4 values");
  p.bounds = {b[0], b[1], b[2], b[3]};
  const json& a = Field<json>(j, "arm");
  p.arm.links = JointsFrom(Field<json>(a, "links"));
  p.arm.lower = JointsFrom(Field<json>(a, "lower"));
  p.arm.upper = JointsFrom(Field<json>(a, "upper"));
  p.arm.max_speed = Field<double>(a, "max_speed");
  p.arm.gripper_rate = Field<double>(a, "gripper_rate");
  if (!(p.dt > 0 && p.capture_radius > 0 && p.target_mass > 0 &&
        p.target_size > 0 && p.arm.max_speed > 0)) {
    throw ConfigError("simulator parameters must be positive");
  }
  return p;
}

json DatasetOptions::ToJson() const {
  return {{"episodes", episodes},
          {"scenario", sim::ScenarioName(scenario)},
          {"seed", seed},
          {"store_images", store_images},
          {"image_height", image_height},
          {"image_width", image_width},
          {"demo_masd_limit", demo_masd_limit},
          {"sim", SimParamsJson(sim)},
          {"expert",
           {{"lead", expert.lead},
            {"horizon", expert.horizon},
            {"masd_budget", expert.masd_budget},
            {"speed_margin", expert.speed_margin},
            {"min_duration", expert.min_duration}}},
          {"rollout",
           {{"halt_eps", rollout.halt_eps},
            {"hold_after_halt", rollout.hold_after_halt},
            {"time_limit", rollout.time_limit}}}};
}

DatasetOptions DatasetOptions::FromJson(const json& j) {
  DatasetOptions o;
  o.episodes = Field<int>(j, "episodes");
  o.scenario = sim::ParseScenario(Field<std::string>(j, "scenario"));
  o.seed = Field<uint64_t>(j, "seed");
  o.store_images = Field<bool>(j, "store_images");
  o.image_height = Field<int>(j, "image_height");
  o.image_width = Field<int>(j, "image_width");
  o.demo_masd_limit = Field<double>(j, "demo_masd_limit");
  o.sim = SimParamsFromJson(Field<json>(j, "sim"));
  const json& e = Field<json>(j, "expert");
  o.expert.lead = Field<double>(e, "lead");
  o.expert.horizon = Field<double>(e, "horizon");
  o.expert.masd_budget = Field<double>(e, "masd_budget");
  o.expert.speed_margin = Field<double>(e, "speed_margin");
  o.expert.min_duration = Field<double>(e, "min_duration");
  const json& r = Field<json>(j, "rollout");
  o.rollout.halt_eps = Field<double>(r, "halt_eps");
  o.rollout.hold_after_halt = Field<double>(r, "hold_after_halt");
  o.rollout.time_limit = Field<double>(r, "time_limit");
  o.rollout.cameras = sim::DefaultCameras(o.image_height, o.image_width);
  if (o.episodes < 1) throw ConfigError("dataset needs at least one episode");
  return o;
}

uint64_t EpisodeSeed(uint64_t master, int64_t index) {
  return num::CounterRng(master, 0xe915 + static_cast<uint64_t>(index)).NextU64();
}

namespace {

sim::EpisodeScenario RenderScenario(const DatasetOptions& o, const std::string& kind,
                                    uint64_t seed) {
  return sim::SpawnEpisode(sim::ScenarioConfig::For(sim::ParseScenario(kind)),
                           o.sim, seed)
      .scenario;
}

num::Array<float> RenderStored(const DatasetOptions& o, const DemoEpisode& ep,
                               int step) {
  const sim::WorldState w =
      sim::DecodeState(o.sim, ep.states.data() + static_cast<int64_t>(step) * sim::kStateDim);
  return sim::RenderAll(o.sim, w, o.rollout.cameras, ep.render_scenario);
}

}  // namespace

Dataset GenerateDataset(const DatasetOptions& options_in) {
  DatasetOptions options = options_in;
  if (options.episodes < 1) throw ConfigError("dataset needs at least one episode");
  options.rollout.cameras = sim::DefaultCameras(options.image_height, options.image_width);
  Dataset ds;
  ds.options = options;
  ds.config = options.ToJson();
  ds.config_hash = io::ConfigHash(ds.config);
  const sim::ScenarioConfig scenario = sim::ScenarioConfig::For(options.scenario);
  const int max_attempts = 10 * options.episodes;
  while (static_cast<int>(ds.episodes.size()) < options.episodes) {
    if (ds.attempts >= max_attempts) {
      throw InvariantError("only " + std::to_string(ds.episodes.size()) +
                           " successful demonstrations after " +
                           std::to_string(ds.attempts) + " attempts");
    }
    const uint64_t seed = EpisodeSeed(options.seed, ds.attempts++);
    sim::Episode episode;
    try {
      episode = sim::SpawnEpisode(scenario, options.sim, seed);
    } catch (const InvariantError&) {
      continue;
    }
    ExpertController expert(options.sim, options.expert);
    const sim::RolloutResult r = sim::Rollout(options.sim, episode, expert, options.rollout);
    const metrics::SuccessRecord rec = metrics::JudgeSuccess(
        r.log, {}, options.rollout.halt_eps, options.rollout.time_limit);
    if (!rec.success()) continue;
    if (*std::max_element(rec.masd.begin(), rec.masd.end()) > options.demo_masd_limit) {
      continue;
    }

    DemoEpisode ep;
    ep.scenario = sim::ScenarioName(options.scenario);
    ep.seed = seed;
    ep.capture_step = r.log.capture_step;
    ep.halt_step = r.halt_step;
    ep.masd = rec.masd;
    ep.render_scenario = episode.scenario;
    const int n = static_cast<int>(r.steps.size());
    ep.proprio = num::Array<float>({n, sim::kActionDim});
    ep.actions = num::Array<float>({n, sim::kActionDim});
    ep.states = num::Array<float>({n, sim::kStateDim});
    ep.events = num::Array<float>({n, 2});
    for (int t = 0; t < n; ++t) {
      const sim::StepRecord& s = r.steps[t];
      const auto p = sim::Proprioception(s.state.arm);
      const auto a = s.command.AsVector();
      const auto st = sim::EncodeState(s.state);
      for (int k = 0; k < sim::kActionDim; ++k) {
        ep.proprio.at(t, k) = static_cast<float>(p[k]);
        ep.actions.at(t, k) = static_cast<float>(a[k]);
      }
      std::copy(st.begin(), st.end(), ep.states.data() + static_cast<int64_t>(t) * sim::kStateDim);
      ep.events.at(t, 0) = s.events.captured_now ? 1.0f : 0.0f;
      ep.events.at(t, 1) = (r.halt_step >= 0 && s.state.step + 1 == r.halt_step) ? 1.0f : 0.0f;
    }
    if (options.store_images) {
      const int c = static_cast<int>(options.rollout.cameras.size());
      ep.images = num::Array<float>({n, c, options.image_height, options.image_width, 3});
      const int64_t per = ep.images.size() / n;
      for (int t = 0; t < n; ++t) {
        const num::Array<float> f = RenderStored(options, ep, t);
        std::copy(f.data(), f.data() + per, ep.images.data() + t * per);
      }
    }
    ds.episodes.push_back(std::move(ep));
  }
  return ds;
}

namespace {

std::string EpisodeDir(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "episode_%04zu", i);
  return buf;
}

}  // namespace

void SaveDataset(const Dataset& ds, const fs::path& dir) {
  json index = json::array();
  double masd_sum[sim::kNumJoints] = {0, 0, 0};
  for (size_t i = 0; i < ds.episodes.size(); ++i) {
    const DemoEpisode& ep = ds.episodes[i];
    io::ContainerWriter w(dir / EpisodeDir(i), "episode");
    w.Put("proprio", ep.proprio);
    w.Put("actions", ep.actions);
    w.Put("states", ep.states);
    w.Put("events", ep.events);
    if (ep.images.size() > 0) w.Put("images", ep.images);
    w.meta() = {{"scenario", ep.scenario},
                {"seed", ep.seed},
                {"steps", ep.length()},
                {"capture_step", ep.capture_step},
                {"halt_step", ep.halt_step},
                {"masd", ep.masd},
                {"success", true}};
    w.Finish();
    index.push_back({{"dir", EpisodeDir(i)}, {"seed", ep.seed}, {"steps", ep.length()}});
    for (int j = 0; j < sim::kNumJoints; ++j) masd_sum[j] += ep.masd[j];
  }
  io::ContainerWriter top(dir, "dataset");
  std::vector<double> masd_mean;
  for (double s : masd_sum) masd_mean.push_back(ds.episodes.empty() ? 0.0 : s / ds.episodes.size());
  top.meta() = {{"config", ds.config},
                {"config_hash", ds.config_hash},
                {"episodes", index},
                {"episode_count", ds.episodes.size()},
                {"attempts", ds.attempts},
                {"success_rate", ds.attempts == 0 ? 0.0
                                                  : static_cast<double>(ds.episodes.size()) /
                                                        ds.attempts},
                {"mean_masd", masd_mean}};
  top.Finish();
}

Dataset LoadDataset(const fs::path& dir, const json* expected_config) {
  io::ContainerReader top(dir, "dataset");
  Dataset ds;
  const json& meta = top.meta();
  ds.config = meta.at("config");
  ds.config_hash = meta.at("config_hash").get<std::string>();
  if (io::ConfigHash(ds.config) != ds.config_hash) {
    throw IoError("dataset manifest config hash does not match its config");
  }
  if (expected_config != nullptr && io::ConfigHash(*expected_config) != ds.config_hash) {
    throw ConfigError("dataset config differs from the requested config: " +
                      io::JsonDiff(*expected_config, ds.config));
  }
  ds.options = DatasetOptions::FromJson(ds.config);
  ds.attempts = meta.at("attempts").get<int>();
  const json& index = meta.at("episodes");
  if (index.size() != meta.at("episode_count").get<size_t>()) {
    throw IoError("dataset manifest episode count disagrees with its index");
  }
  for (const json& e : index) {
    io::ContainerReader r(dir / e.at("dir").get<std::string>(), "episode");
    DemoEpisode ep;
    const json& m = r.meta();
    ep.scenario = m.at("scenario").get<std::string>();
    ep.seed = m.at("seed").get<uint64_t>();
    ep.capture_step = m.at("capture_step").get<int64_t>();
    ep.halt_step = m.at("halt_step").get<int64_t>();
    ep.masd = m.at("masd").get<std::vector<double>>();
    ep.proprio = r.Get("proprio");
    ep.actions = r.Get("actions");
    ep.states = r.Get("states");
    ep.events = r.Get("events");
    if (r.Has("images")) ep.images = r.Get("images");
    const int n = ep.length();
    if (n != m.at("steps").get<int>() || ep.actions.shape() != num::Shape{n, sim::kActionDim} ||
        ep.states.shape() != num::Shape{n, sim::kStateDim}) {
      throw IoError("episode " + e.at("dir").get<std::string>() + " has inconsistent shapes");
    }
    ep.render_scenario = RenderScenario(ds.options, ep.scenario, ep.seed);
    ds.episodes.push_back(std::move(ep));
  }
  return ds;
}

num::Array<float> EpisodeFrames(const Dataset& ds, int episode, int step) {
  const DemoEpisode& ep = ds.episodes.at(episode);
  if (step < 0 || step >= ep.length()) throw ShapeError("step out of range");
  if (ep.images.size() == 0) return RenderStored(ds.options, ep, step);
  const auto& s = ep.images.shape();
  num::Array<float> out({s[1], s[2], s[3], s[4]});
  const int64_t per = out.size();
  std::copy(ep.images.data() + step * per, ep.images.data() + (step + 1) * per, out.data());
  return out;
}

}  // namespace ifcgrasp::expert
