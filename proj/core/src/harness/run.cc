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
#include <cstdio>
#include <sstream>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/harness/serialize.h"
#include "ifcgrasp/io/container.h"

namespace ifcgrasp::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void Take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void CheckKeys(const json& j, std::initializer_list<const char*> allowed,
               const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string Num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

RunConfig RunConfig::FromJson(const json& j) {
  CheckKeys(j, {"preset", "dataset", "policy", "train", "eval", "montecarlo"}, "run config");
  RunConfig c;
  Take(j, "preset", c.preset);
  if (c.preset != "desk" && c.preset != "paper") {
    throw ConfigError("unknown preset '" + c.preset + "' (expected desk or paper)");
  }
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    CheckKeys(d, {"episodes", "scenario", "seed", "store_images"}, "dataset");
    Take(d, "episodes", c.dataset.episodes);
    if (d.contains("scenario")) {
      c.dataset.scenario = sim::ParseScenario(d.at("scenario").get<std::string>());
    }
    Take(d, "seed", c.dataset.seed);
    Take(d, "store_images", c.dataset.store_images);
  }
  if (j.contains("policy")) {
    c.policy = j.at("policy");
    if (!c.policy.is_object()) throw ConfigError("policy must be an object");
    if (c.policy.contains("preset")) throw ConfigError("set the preset at the top level");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    CheckKeys(t, {"steps", "batch_size", "learning_rate", "weight_decay", "seed", "init_seed",
                  "cosine_decay", "warmup_steps", "max_grad_norm"},
              "train");
    Take(t, "steps", c.train.steps);
    Take(t, "batch_size", c.train.batch_size);
    Take(t, "learning_rate", c.train.learning_rate);
    Take(t, "weight_decay", c.train.weight_decay);
    Take(t, "seed", c.train.seed);
    Take(t, "init_seed", c.train.init_seed);
    Take(t, "cosine_decay", c.train.cosine_decay);
    Take(t, "warmup_steps", c.train.warmup_steps);
    Take(t, "max_grad_norm", c.train.max_grad_norm);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    CheckKeys(e, {"episodes", "seed", "scenarios"}, "eval");
    Take(e, "episodes", c.eval.episodes);
    Take(e, "seed", c.eval.seed);
    Take(e, "scenarios", c.eval.scenarios);
  }
  if (j.contains("montecarlo")) {
    const json& m = j.at("montecarlo");
    CheckKeys(m, {"rows", "cols", "episodes_per_cell", "axes", "scenario", "lateral",
                  "longitudinal", "bearing", "speed_min", "speed_max", "seed"},
              "montecarlo");
    auto& mc = c.montecarlo;
    Take(m, "rows", mc.rows);
    Take(m, "cols", mc.cols);
    Take(m, "episodes_per_cell", mc.episodes_per_cell);
    Take(m, "axes", mc.axes);
    Take(m, "scenario", mc.scenario);
    Take(m, "lateral", mc.lateral);
    Take(m, "longitudinal", mc.longitudinal);
    Take(m, "bearing", mc.bearing);
    Take(m, "speed_min", mc.speed_min);
    Take(m, "speed_max", mc.speed_max);
    Take(m, "seed", mc.seed);
  }
  // Validation.
  const policy::PolicyConfig p = [&] {
    json pj = c.policy;
    pj["preset"] = c.preset;
    return PolicyConfigFromJson(pj);
  }();
  c.dataset.image_height = p.image_height;
  c.dataset.image_width = p.image_width;
  if (c.dataset.episodes < 1) throw ConfigError("dataset.episodes must be >= 1");
  if (c.train.steps < 0 || c.train.batch_size < 1 || !(c.train.learning_rate > 0)) {
    throw ConfigError("train needs steps >= 0, batch_size >= 1 and learning_rate > 0");
  }
  if (c.train.warmup_steps < 0 || !(c.train.max_grad_norm >= 0)) {
    throw ConfigError("train.warmup_steps and train.max_grad_norm must be >= 0");
  }
  if (c.eval.episodes < 1) throw ConfigError("eval.episodes must be >= 1");
  for (const auto& s : c.eval.scenarios) sim::ParseScenario(s);
  const auto& mc = c.montecarlo;
  if (mc.rows < 1 || mc.cols < 1 || mc.episodes_per_cell < 1) {
    throw ConfigError("montecarlo grid and episode counts must be positive");
  }
  if (mc.axes != "home_offset" && mc.axes != "target_offset_speed") {
    throw ConfigError("montecarlo.axes must be home_offset or target_offset_speed");
  }
  sim::ParseScenario(mc.scenario);
  if (!(mc.speed_min > 0 && mc.speed_max >= mc.speed_min)) {
    throw ConfigError("montecarlo speed range must satisfy 0 < min <= max");
  }
  return c;
}

json RunConfig::ToJson() const {
  return {{"preset", preset},
          {"dataset", dataset.ToJson()},
          {"policy", policy},
          {"train",
           {{"steps", train.steps},
            {"batch_size", train.batch_size},
            {"learning_rate", train.learning_rate},
            {"weight_decay", train.weight_decay},
            {"seed", train.seed},
            {"init_seed", train.init_seed},
            {"cosine_decay", train.cosine_decay},
            {"warmup_steps", train.warmup_steps},
            {"max_grad_norm", train.max_grad_norm}}},
          {"eval", {{"episodes", eval.episodes}, {"seed", eval.seed}, {"scenarios", eval.scenarios}}},
          {"montecarlo",
           {{"rows", montecarlo.rows},
            {"cols", montecarlo.cols},
            {"episodes_per_cell", montecarlo.episodes_per_cell},
            {"axes", montecarlo.axes},
            {"scenario", montecarlo.scenario},
            {"lateral", montecarlo.lateral},
            {"longitudinal", montecarlo.longitudinal},
            {"bearing", montecarlo.bearing},
            {"speed_min", montecarlo.speed_min},
            {"speed_max", montecarlo.speed_max},
            {"seed", montecarlo.seed}}}};
}

policy::PolicyConfig RunConfig::Policy(bool disable_correlation) const {
  json pj = policy;
  pj["preset"] = preset;
  policy::PolicyConfig c = PolicyConfigFromJson(pj);
  if (disable_correlation) c.use_correlation = false;
  c.Validate();
  return c;
}

void RunConfig::RequireRunnable() const {
  if (preset != "desk") {
    throw ConfigError("the " + preset + " preset is shape-check only; use desk to run");
  }
}

RunConfig LoadRunConfig(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::ReadTextFile(path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return RunConfig::FromJson(j);
}

void SaveCheckpoint(const fs::path& dir, const policy::ActPolicy<float>& policy,
                    const Normalizers& norm, const json& provenance,
                    const std::vector<policy::TrainStats>& curve) {
  io::ContainerWriter w(dir, "checkpoint");
  json names = json::array();
  for (const num::Parameter<float>* p :
       const_cast<policy::ActPolicy<float>&>(policy).store().All()) {
    w.Put(p->name, p->value);
    names.push_back(p->name);
  }
  num::Array<float> loss({static_cast<int>(curve.size()), 3});
  for (size_t i = 0; i < curve.size(); ++i) {
    loss.at(static_cast<int>(i), 0) = static_cast<float>(curve[i].loss);
    loss.at(static_cast<int>(i), 1) = static_cast<float>(curve[i].l1);
    loss.at(static_cast<int>(i), 2) = static_cast<float>(curve[i].kl);
  }
  if (!curve.empty()) w.Put("_loss_curve", loss);
  w.meta() = {{"policy", PolicyConfigToJson(policy.config())},
              {"normalizer",
               {{"proprio", NormalizerToJson(norm.proprio)},
                {"actions", NormalizerToJson(norm.actions)}}},
              {"parameters", names},
              {"provenance", provenance}};
  w.Finish();
}

Checkpoint LoadCheckpoint(const fs::path& dir) {
  io::ContainerReader r(dir, "checkpoint");
  Checkpoint c;
  const json& meta = r.meta();
  c.config = PolicyConfigFromJson(meta.at("policy"));
  c.norm.proprio = NormalizerFromJson(meta.at("normalizer").at("proprio"));
  c.norm.actions = NormalizerFromJson(meta.at("normalizer").at("actions"));
  c.provenance = meta.at("provenance");
  c.policy = std::make_unique<policy::ActPolicy<float>>(c.config, 0);
  const auto params = c.policy->store().All();
  if (params.size() != meta.at("parameters").size()) {
    throw IoError("checkpoint parameter count differs from the model");
  }
  for (num::Parameter<float>* p : params) {
    num::Array<float> v = r.Get(p->name);
    if (v.shape() != p->value.shape()) {
      throw IoError("checkpoint stream '" + p->name + "' has shape " +
                    num::ShapeString(v.shape()) + ", model expects " +
                    num::ShapeString(p->value.shape()));
    }
    p->value = std::move(v);
  }
  const std::string text = io::ReadTextFile(dir / "manifest.json");
  c.hash = io::HexDigest(io::Fnv1a(text.data(), text.size()));
  return c;
}

TrainResult TrainPolicy(const RunConfig& config, const expert::Dataset& dataset,
                        bool disable_correlation,
                        const std::function<void(const policy::TrainStats&)>& progress) {
  config.RequireRunnable();
  const policy::PolicyConfig pc = config.Policy(disable_correlation);
  TrainResult out;
  out.norm = FitNormalizers(dataset, pc);
  out.policy = std::make_unique<policy::ActPolicy<float>>(pc, config.train.init_seed);
  DemoSource source(dataset, out.norm, pc);
  policy::TrainOptions opts;
  opts.steps = config.train.steps;
  opts.batch_size = config.train.batch_size;
  opts.seed = config.train.seed;
  opts.optimizer.learning_rate = config.train.learning_rate;
  opts.optimizer.weight_decay = config.train.weight_decay;
  opts.cosine_decay = config.train.cosine_decay;
  opts.warmup_steps = config.train.warmup_steps;
  opts.max_grad_norm = config.train.max_grad_norm;
  out.curve = policy::Train(*out.policy, source, opts, progress);
  return out;
}

int ScenarioSummary::successes() const {
  int n = 0;
  for (const auto& e : episodes) n += e.record.success();
  return n;
}

double ScenarioSummary::success_rate() const {
  return episodes.empty() ? 0.0 : static_cast<double>(successes()) / episodes.size();
}

json ScenarioSummary::ToJson() const {
  const int joints = episodes.empty() ? 0 : static_cast<int>(episodes[0].record.masd.size());
  std::vector<double> masd_mean(joints, 0.0), jerk_mean(joints, 0.0), torque_mean(joints, 0.0);
  std::vector<std::vector<double>> masd_cols(joints);
  json reasons = {{"none", 0}, {"no_grasp", 0}, {"not_halted", 0}, {"masd_exceeded", 0}};
  double divergence = 0;
  json list = json::array();
  for (const auto& e : episodes) {
    reasons[metrics::FailureName(e.record.reason)] =
        reasons[metrics::FailureName(e.record.reason)].get<int>() + 1;
    for (int j = 0; j < joints; ++j) {
      masd_mean[j] += e.record.masd[j] / episodes.size();
      jerk_mean[j] += e.record.jerk[j] / episodes.size();
      torque_mean[j] += e.reaction_torque[j] / episodes.size();
      masd_cols[j].push_back(e.record.masd[j]);
    }
    divergence += e.divergence / episodes.size();
    list.push_back({{"index", e.index},
                    {"seed", e.seed},
                    {"success", e.record.success()},
                    {"reason", metrics::FailureName(e.record.reason)},
                    {"grasped", e.record.grasped},
                    {"halted", e.record.halted},
                    {"masd_ok", e.record.masd_ok},
                    {"masd", e.record.masd},
                    {"jerk", e.record.jerk},
                    {"max_acceleration", e.record.max_acceleration},
                    {"reaction_torque", e.reaction_torque},
                    {"max_hold_torque", e.max_hold_torque},
                    {"steps", e.steps},
                    {"capture_step", e.capture_step},
                    {"halt_step", e.halt_step},
                    {"initial_speed", e.initial_speed},
                    {"divergence", e.divergence}});
  }
  std::vector<double> masd_median(joints);
  for (int j = 0; j < joints; ++j) masd_median[j] = Median(masd_cols[j]);
  double jerk_avg = 0;
  for (double v : jerk_mean) jerk_avg += joints > 0 ? v / joints : 0.0;
  return {{"scenario", scenario},
          {"episodes", episodes.size()},
          {"successes", successes()},
          {"success_rate", success_rate()},
          {"reasons", reasons},
          {"masd_mean", masd_mean},
          {"masd_median", masd_median},
          {"jerk_mean", jerk_mean},
          {"jerk_joint_average", jerk_avg},
          {"reaction_torque_mean", torque_mean},
          {"cluster_divergence", divergence},
          {"per_episode", list}};
}

ControllerFactory ExpertFactory(const sim::SimParams& params) {
  return [params] { return std::make_unique<expert::ExpertController>(params); };
}

ControllerFactory PolicyFactory(const policy::ActPolicy<float>& policy, const Normalizers& norm) {
  return [&policy, norm] { return std::make_unique<PolicyController>(policy, norm); };
}

namespace {

EpisodeOutcome RunOne(const sim::SimParams& params, const sim::Episode& episode,
                      const ControllerFactory& factory, const sim::RolloutOptions& rollout) {
  std::unique_ptr<sim::Controller> controller = factory();
  const sim::RolloutResult r = sim::Rollout(params, episode, *controller, rollout);
  EpisodeOutcome o;
  o.record = metrics::JudgeSuccess(r.log, {}, rollout.halt_eps, rollout.time_limit);
  o.steps = static_cast<int64_t>(r.steps.size());
  o.capture_step = r.log.capture_step;
  o.halt_step = r.halt_step;
  o.initial_speed = episode.world.target.velocity.norm();
  if (const auto* chunks = controller->chunk_history()) {
    const metrics::DivergenceCurve d = metrics::ClusterDivergence(*chunks, sim::kNumJoints);
    o.divergence = d.mean;
    o.divergence_curve = d.values;
  }
  o.reaction_torque = metrics::ReactionTorque(r.log.joints, {});
  o.max_hold_torque.assign(sim::kNumJoints, 0.0);
  for (const auto& s : r.steps) {
    for (int j = 0; j < sim::kNumJoints; ++j) {
      o.max_hold_torque[j] = std::max(o.max_hold_torque[j], std::abs(s.events.hold_torque[j]));
    }
  }
  return o;
}

}  // namespace

ScenarioSummary EvaluateScenario(const sim::SimParams& params,
                                 const sim::ScenarioConfig& scenario, int episodes,
                                 uint64_t seed, const ControllerFactory& factory,
                                 const sim::RolloutOptions& rollout) {
  if (episodes < 1) throw ConfigError("need at least one evaluation episode");
  ScenarioSummary s;
  s.scenario = sim::ScenarioName(scenario.kind);
  int64_t attempt = 0;
  for (int i = 0; i < episodes; ++i) {
    sim::Episode ep;
    uint64_t ep_seed = 0;
    for (;; ++attempt) {
      if (attempt > 10LL * episodes) {
        throw InvariantError("scenario spawns keep missing the workspace");
      }
      ep_seed = expert::EpisodeSeed(seed, attempt);
      try {
        ep = sim::SpawnEpisode(scenario, params, ep_seed);
        ++attempt;
        break;
      } catch (const InvariantError&) {
      }
    }
    EpisodeOutcome o = RunOne(params, ep, factory, rollout);
    o.index = i;
    o.seed = ep_seed;
    s.episodes.push_back(std::move(o));
  }
  return s;
}

std::vector<GridCell> RunMonteCarlo(const sim::SimParams& params,
                                    const MonteCarloConfig& config,
                                    const ControllerFactory& factory,
                                    const sim::RolloutOptions& rollout) {
  auto axis = [](int i, int n, double half) {
    return n == 1 ? 0.0 : -half + 2.0 * half * i / (n - 1);
  };
  const sim::ScenarioKind kind = sim::ParseScenario(config.scenario);
  std::vector<GridCell> cells;
  for (int r = 0; r < config.rows; ++r) {
    for (int c = 0; c < config.cols; ++c) {
      GridCell cell;
      cell.row = r;
      cell.col = c;
      sim::ScenarioConfig sc;
      if (config.axes == "home_offset") {
        cell.row_value = axis(r, config.rows, config.lateral);
        cell.col_value = axis(c, config.cols, config.longitudinal);
        sc = sim::ScenarioConfig::MonteCarlo(sim::Vec2(cell.col_value, cell.row_value));
        sc.speed_min = config.speed_min;
        sc.speed_max = config.speed_max;
      } else {
        cell.row_value = axis(r, config.rows, config.bearing);
        const double width = (config.speed_max - config.speed_min) / config.cols;
        sc.bearing_center = cell.row_value;
        sc.spawn_bearing = config.rows == 1 ? config.bearing : config.bearing / (config.rows - 1);
        sc.speed_min = config.speed_min + c * width;
        sc.speed_max = sc.speed_min + width;
        cell.col_value = 0.5 * (sc.speed_min + sc.speed_max);
      }
      sc.kind = kind;
      const uint64_t cell_seed =
          expert::EpisodeSeed(config.seed, static_cast<int64_t>(r) * config.cols + c);
      const ScenarioSummary s =
          EvaluateScenario(params, sc, config.episodes_per_cell, cell_seed, factory, rollout);
      cell.episodes = static_cast<int>(s.episodes.size());
      cell.successes = s.successes();
      cells.push_back(cell);
    }
  }
  return cells;
}

json HardwareReferenceRates() {
  return {{"note",
           "published physical-hardware results; context only, not reproducible "
           "at desk scale"},
          {"ours", {{"standard", 0.96}, {"low_light", 0.82}, {"camera_occlusion", 0.90},
                    {"target_occlusion", 0.714}, {"target_maneuver", 0.514}}},
          {"act_with_safety_gate",
           {{"standard", 0.60}, {"low_light", 0.54}, {"camera_occlusion", 0.19},
            {"target_occlusion", 0.261}, {"target_maneuver", 0.333}}}};
}

void WriteEvalReport(const fs::path& dir, const std::vector<ScenarioSummary>& scenarios,
                     const json& provenance) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());
  json report = {{"format_version", io::kFormatVersion},
                 {"provenance", provenance},
                 {"divergence_space", "joint"},
                 {"reference", HardwareReferenceRates()},
                 {"scenarios", json::object()}};
  std::ostringstream csv;
  csv << "scenario,episode,seed,joint,success,reason,masd,jerk,max_acceleration,"
         "reaction_torque,max_hold_torque\n";
  for (const auto& s : scenarios) {
    report["scenarios"][s.scenario] = s.ToJson();
    for (const auto& e : s.episodes) {
      for (size_t j = 0; j < e.record.masd.size(); ++j) {
        csv << s.scenario << ',' << e.index << ',' << e.seed << ",J" << j + 1 << ','
            << (e.record.success() ? 1 : 0) << ',' << metrics::FailureName(e.record.reason)
            << ',' << Num(e.record.masd[j]) << ',' << Num(e.record.jerk[j]) << ','
            << Num(e.record.max_acceleration[j]) << ',' << Num(e.reaction_torque[j]) << ','
            << Num(e.max_hold_torque[j]) << '\n';
      }
    }
  }
  io::WriteTextFile(dir / "report.json", report.dump(2) + "\n");
  io::WriteTextFile(dir / "metrics.csv", csv.str());
}

void WriteGridReport(const fs::path& dir, const std::vector<GridCell>& cells,
                     const MonteCarloConfig& config, const json& provenance) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());
  const bool home = config.axes == "home_offset";
  std::ostringstream csv;
  csv << "row,col," << (home ? "lateral_offset_m,longitudinal_offset_m"
                             : "bearing_offset_rad,speed_m_s")
      << ",episodes,successes,success_rate\n";
  json grid = json::array();
  for (const auto& c : cells) {
    const double rate = c.episodes ? static_cast<double>(c.successes) / c.episodes : 0.0;
    csv << c.row << ',' << c.col << ',' << Num(c.row_value) << ',' << Num(c.col_value) << ','
        << c.episodes << ',' << c.successes << ',' << Num(rate) << '\n';
    grid.push_back({{"row", c.row}, {"col", c.col}, {"row_value", c.row_value},
                    {"col_value", c.col_value}, {"episodes", c.episodes},
                    {"successes", c.successes}, {"success_rate", rate}});
  }
  const json report = {{"format_version", io::kFormatVersion},
                       {"provenance", provenance},
                       {"axes", config.axes},
                       {"scenario", config.scenario},
                       {"rows", config.rows},
                       {"cols", config.cols},
                       {"cells", grid}};
  io::WriteTextFile(dir / "grid.json", report.dump(2) + "\n");
  io::WriteTextFile(dir / "grid.csv", csv.str());
}

}  // namespace ifcgrasp::harness
