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

#include "ifcgrasp/harness/commands.h"

#include <cstdio>
#include <sstream>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/harness/serialize.h"
#include "ifcgrasp/io/container.h"

namespace ifcgrasp::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Loaded {
  ControllerFactory factory;
  sim::RolloutOptions rollout;
  json provenance;
  Checkpoint checkpoint;  // empty for the expert
};

Loaded LoadController(const std::string& name, const sim::SimParams& params) {
  Loaded l;
  if (name == kExpertCheckpoint) {
    l.factory = ExpertFactory(params);
    l.provenance = {{"controller", "expert"}};
    return l;
  }
  if (!fs::exists(fs::path(name) / "manifest.json")) {
    throw IoError("missing checkpoint " + name);
  }
  l.checkpoint = LoadCheckpoint(name);
  if (l.checkpoint.config.preset != "desk") {
    throw ConfigError("checkpoint preset '" + l.checkpoint.config.preset +
                      "' cannot drive the simulator");
  }
  const json& prov = l.checkpoint.provenance;
  if (prov.contains("sim") && prov.at("sim") != expert::SimParamsJson(params)) {
    throw ConfigError("checkpoint was trained against different simulator parameters:\n" +
                      io::JsonDiff(prov.at("sim"), expert::SimParamsJson(params)));
  }
  l.factory = PolicyFactory(*l.checkpoint.policy, l.checkpoint.norm);
  l.rollout = PolicyRolloutOptions(l.checkpoint.config);
  l.provenance = {{"controller", "policy"},
                  {"checkpoint_hash", l.checkpoint.hash},
                  {"checkpoint", prov}};
  return l;
}

}  // namespace

json GenDataCommand(const RunConfig& config, const fs::path& out) {
  config.RequireRunnable();
  const expert::Dataset ds = expert::GenerateDataset(config.dataset);
  SaveDataset(ds, out);
  double masd = 0;
  for (const auto& e : ds.episodes) masd += e.masd[0] / ds.episodes.size();
  return {{"episodes", ds.episodes.size()},
          {"attempts", ds.attempts},
          {"config_hash", ds.config_hash},
          {"mean_masd_j1", masd}};
}

json TrainCommand(const RunConfig& config, const fs::path& dataset, const fs::path& out,
                  bool disable_correlation, bool check_config, const Progress& progress) {
  config.RequireRunnable();
  if (!fs::exists(dataset / "manifest.json")) {
    throw IoError("missing dataset " + dataset.string());
  }
  const json expected = config.dataset.ToJson();
  const expert::Dataset ds = expert::LoadDataset(dataset, check_config ? &expected : nullptr);
  double window = 0;
  int count = 0;
  TrainResult t = TrainPolicy(config, ds, disable_correlation, [&](const policy::TrainStats& s) {
    window += s.loss;
    if (++count == 100 && progress) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "step %d loss %.4f", s.step + 1, window / count);
      progress(buf);
    }
    if (count == 100) window = count = 0;
  });
  const json run = config.ToJson();
  const json provenance = {{"run_config", run},
                           {"run_config_hash", io::ConfigHash(run)},
                           {"dataset_config", ds.config},
                           {"dataset_hash", ds.config_hash},
                           {"disable_correlation", disable_correlation},
                           {"train_seed", config.train.seed},
                           {"init_seed", config.train.init_seed},
                           {"sim", expert::SimParamsJson(config.dataset.sim)},
                           {"format_version", io::kFormatVersion}};
  SaveCheckpoint(out, *t.policy, t.norm, provenance, t.curve);
  return {{"steps", t.curve.size()},
          {"final_loss", t.curve.empty() ? 0.0 : t.curve.back().loss},
          {"use_correlation", t.policy->config().use_correlation}};
}

json EvalCommand(const RunConfig& config, const std::string& checkpoint, const fs::path& out,
                 const Progress& progress) {
  config.RequireRunnable();
  const sim::SimParams& params = config.dataset.sim;
  const Loaded l = LoadController(checkpoint, params);
  std::vector<ScenarioSummary> summaries;
  json brief = json::object();
  for (const std::string& name : config.eval.scenarios) {
    const sim::ScenarioConfig sc = sim::ScenarioConfig::For(sim::ParseScenario(name));
    summaries.push_back(
        EvaluateScenario(params, sc, config.eval.episodes, config.eval.seed, l.factory, l.rollout));
    brief[name] = summaries.back().success_rate();
    if (progress) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s: %d/%zu", name.c_str(), summaries.back().successes(),
                    summaries.back().episodes.size());
      progress(buf);
    }
  }
  const json eval = {{"episodes", config.eval.episodes},
                     {"seed", config.eval.seed},
                     {"scenarios", config.eval.scenarios},
                     {"sim", expert::SimParamsJson(params)}};
  json provenance = l.provenance;
  provenance["eval"] = eval;
  provenance["eval_hash"] = io::ConfigHash(eval);
  provenance["format_version"] = io::kFormatVersion;
  WriteEvalReport(out, summaries, provenance);
  return brief;
}

json MonteCarloCommand(const RunConfig& config, const std::string& checkpoint,
                       const fs::path& out) {
  config.RequireRunnable();
  const sim::SimParams& params = config.dataset.sim;
  const Loaded l = LoadController(checkpoint, params);
  const std::vector<GridCell> cells = RunMonteCarlo(params, config.montecarlo, l.factory, l.rollout);
  json provenance = l.provenance;
  provenance["montecarlo"] = config.ToJson().at("montecarlo");
  provenance["sim"] = expert::SimParamsJson(params);
  provenance["format_version"] = io::kFormatVersion;
  WriteGridReport(out, cells, config.montecarlo, provenance);
  int ok = 0, n = 0;
  for (const auto& c : cells) {
    ok += c.successes;
    n += c.episodes;
  }
  return {{"cells", cells.size()}, {"episodes", n}, {"successes", ok}};
}

json ReportCommand(const std::vector<fs::path>& inputs, const fs::path& out) {
  if (inputs.empty()) throw ConfigError("report needs at least one eval directory");
  json rows = json::array();
  std::ostringstream csv;
  csv << "label,controller,use_correlation,scenario,episodes,successes,success_rate,"
         "masd_median_j1,masd_mean_j1,jerk_joint_average,cluster_divergence\n";
  for (const fs::path& dir : inputs) {
    json r;
    try {
      r = json::parse(io::ReadTextFile(dir / "report.json"));
    } catch (const json::exception& e) {
      throw IoError("malformed report in " + dir.string() + ": " + e.what());
    }
    const json& prov = r.at("provenance");
    const std::string label = fs::path(dir).lexically_normal().filename().string().empty()
                                  ? fs::path(dir).lexically_normal().parent_path().filename().string()
                                  : fs::path(dir).lexically_normal().filename().string();
    const bool corr = prov.value("controller", "") == "policy" &&
                      !prov.at("checkpoint").value("disable_correlation", false);
    for (const auto& [name, s] : r.at("scenarios").items()) {
      const json row = {{"label", label},
                        {"controller", prov.value("controller", "")},
                        {"use_correlation", corr},
                        {"scenario", name},
                        {"episodes", s.at("episodes")},
                        {"successes", s.at("successes")},
                        {"success_rate", s.at("success_rate")},
                        {"masd_median_j1", s.at("masd_median")[0]},
                        {"masd_mean_j1", s.at("masd_mean")[0]},
                        {"jerk_joint_average", s.at("jerk_joint_average")},
                        {"cluster_divergence", s.at("cluster_divergence")}};
      csv << label << ',' << row["controller"].get<std::string>() << ',' << (corr ? 1 : 0) << ','
          << name << ',' << row["episodes"] << ',' << row["successes"] << ','
          << row["success_rate"] << ',' << row["masd_median_j1"] << ','
          << row["masd_mean_j1"] << ',' << row["jerk_joint_average"] << ','
          << row["cluster_divergence"] << '\n';
      rows.push_back(row);
    }
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string());
  const json summary = {{"format_version", io::kFormatVersion},
                        {"reference", HardwareReferenceRates()},
                        {"rows", rows}};
  io::WriteTextFile(out / "summary.json", summary.dump(2) + "\n");
  io::WriteTextFile(out / "summary.csv", csv.str());
  return {{"rows", rows.size()}};
}

std::pair<int, int> ParseGrid(const std::string& text) {
  int r = 0, c = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &r, &x, &c, &extra) != 3 || (x != 'x' && x != 'X') ||
      r < 1 || c < 1) {
    throw ConfigError("--grid expects RxC with positive integers, got '" + text + "'");
  }
  return {r, c};
}

}  // namespace ifcgrasp::harness
