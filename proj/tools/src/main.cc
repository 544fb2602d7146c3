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

// ifcgrasp: dataset generation, training, evaluation and reporting.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/harness/commands.h"
#include "ifcgrasp/harness/shapes.h"
#include "ifcgrasp/io/container.h"

namespace {

namespace fs = std::filesystem;
namespace h = ifcgrasp::harness;
using nlohmann::json;

enum ExitCode { kOk = 0, kConfig = 2, kInvariant = 3, kIo = 4 };

struct Flags {
  std::string config;
  std::string preset;
  std::string scenario;
  int episodes = 0;
  int64_t seed = -1;
  std::string checkpoint;
  std::string dataset;
  std::string out;
  bool disable_correlation = false;
  std::string grid;
  std::vector<std::string> inputs;
};

// Config file first, then flags on top, validated together.
h::RunConfig Resolve(const Flags& f, const std::string& command) {
  json j = json::object();
  if (!f.config.empty()) j = json::parse(ifcgrasp::io::ReadTextFile(f.config));
  if (!j.is_object()) throw ifcgrasp::ConfigError("config must be a JSON object");
  if (!f.preset.empty()) j["preset"] = f.preset;
  if (command == "gen-data") {
    if (!f.scenario.empty()) j["dataset"]["scenario"] = f.scenario;
    if (f.episodes > 0) j["dataset"]["episodes"] = f.episodes;
    if (f.seed >= 0) j["dataset"]["seed"] = f.seed;
  } else if (command == "train") {
    if (f.seed >= 0) j["train"]["seed"] = f.seed;
  } else if (command == "eval") {
    if (!f.scenario.empty()) j["eval"]["scenarios"] = json::array({f.scenario});
    if (f.episodes > 0) j["eval"]["episodes"] = f.episodes;
    if (f.seed >= 0) j["eval"]["seed"] = f.seed;
  } else if (command == "montecarlo") {
    if (!f.scenario.empty()) j["montecarlo"]["scenario"] = f.scenario;
    if (f.episodes > 0) j["montecarlo"]["episodes_per_cell"] = f.episodes;
    if (f.seed >= 0) j["montecarlo"]["seed"] = f.seed;
    if (!f.grid.empty()) {
      const auto [r, c] = h::ParseGrid(f.grid);
      j["montecarlo"]["rows"] = r;
      j["montecarlo"]["cols"] = c;
    }
  }
  return h::RunConfig::FromJson(j);
}

void Require(const std::string& value, const char* flag) {
  if (value.empty()) throw ifcgrasp::ConfigError(std::string(flag) + " is required");
}

int Run(const std::string& command, const Flags& f) {
  const h::RunConfig cfg = Resolve(f, command);
  auto log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
  json result;
  if (command == "gen-data") {
    const std::string out = !f.out.empty() ? f.out : f.dataset;
    Require(out, "--out");
    result = h::GenDataCommand(cfg, out);
  } else if (command == "train") {
    Require(f.dataset, "--dataset");
    Require(f.out, "--out");
    result = h::TrainCommand(cfg, f.dataset, f.out, f.disable_correlation, !f.config.empty(), log);
  } else if (command == "eval") {
    Require(f.checkpoint, "--checkpoint");
    Require(f.out, "--out");
    result = h::EvalCommand(cfg, f.checkpoint, f.out, log);
  } else if (command == "montecarlo") {
    Require(f.checkpoint, "--checkpoint");
    Require(f.out, "--out");
    result = h::MonteCarloCommand(cfg, f.checkpoint, f.out);
  } else if (command == "report") {
    Require(f.out, "--out");
    std::vector<fs::path> dirs(f.inputs.begin(), f.inputs.end());
    result = h::ReportCommand(dirs, f.out);
  } else if (command == "shapes") {
    const auto policy = cfg.Policy(f.disable_correlation);
    const h::ShapeReport r = h::MeasureShapes(policy);
    std::cout << r.ToJson().dump(2) << "\n";
    const auto bad = h::ShapeMismatches(r, policy);
    for (const auto& line : bad) std::fprintf(stderr, "shape mismatch: %s\n", line.c_str());
    if (!bad.empty()) return kInvariant;
    std::fprintf(stderr, "all %s shapes match\n", cfg.preset.c_str());
    return kOk;
  }
  std::cout << result.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ifcgrasp: desk-scale visuomotor grasping of free-floating targets"};
  app.require_subcommand(1, 1);
  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
    sub->add_option("--preset", f.preset, "desk or paper");
    sub->add_option("--seed", f.seed, "master seed for this command");
    sub->add_option("--out", f.out, "output directory");
  };
  CLI::App* gen = app.add_subcommand("gen-data", "generate expert demonstrations");
  common(gen);
  gen->add_option("--scenario", f.scenario);
  gen->add_option("--episodes", f.episodes);
  gen->add_option("--dataset", f.dataset, "alias for --out");

  CLI::App* train = app.add_subcommand("train", "train a policy checkpoint");
  common(train);
  train->add_option("--dataset", f.dataset, "dataset directory");
  train->add_flag("--disable-correlation", f.disable_correlation, "train the plain baseline");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint (or 'expert')");
  common(eval);
  eval->add_option("--checkpoint", f.checkpoint);
  eval->add_option("--scenario", f.scenario);
  eval->add_option("--episodes", f.episodes);

  CLI::App* mc = app.add_subcommand("montecarlo", "success grid over offsets");
  common(mc);
  mc->add_option("--checkpoint", f.checkpoint);
  mc->add_option("--scenario", f.scenario);
  mc->add_option("--episodes", f.episodes, "episodes per cell");
  mc->add_option("--grid", f.grid, "RxC, e.g. 5x5");

  CLI::App* report = app.add_subcommand("report", "summarize eval directories");
  common(report);
  report->add_option("inputs", f.inputs, "eval output directories")->required();

  CLI::App* shapes = app.add_subcommand("shapes", "assert model extents for a preset");
  common(shapes);
  shapes->add_flag("--disable-correlation", f.disable_correlation);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return Run(command, f);
  } catch (const ifcgrasp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const ifcgrasp::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kInvariant;
  }
}
