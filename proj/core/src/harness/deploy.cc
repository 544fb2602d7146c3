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

#include "ifcgrasp/harness/deploy.h"

#include <algorithm>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/sim/render.h"

namespace ifcgrasp::harness {

namespace {

std::vector<double> Row(const num::Array<float>& a, int r) {
  std::vector<double> out(a.shape()[1]);
  for (int c = 0; c < a.shape()[1]; ++c) out[c] = a.at(r, c);
  return out;
}

num::Array<float> ToArray(const std::vector<double>& v) {
  num::Array<float> a({static_cast<int>(v.size())});
  for (size_t i = 0; i < v.size(); ++i) a[i] = static_cast<float>(v[i]);
  return a;
}

num::Array<float> Camera(const num::Array<float>& stack, int index) {
  const auto& s = stack.shape();
  num::Array<float> out({s[1], s[2], s[3]});
  const int64_t per = out.size();
  std::copy(stack.data() + index * per, stack.data() + (index + 1) * per, out.data());
  return out;
}

// Action row t + i as the policy sees it from step t.
std::vector<double> Target(const expert::DemoEpisode& ep, int t, int i, bool relative) {
  std::vector<double> a = Row(ep.actions, std::min(t + i, ep.length() - 1));
  if (relative) {
    for (int j = 0; j < sim::kNumJoints; ++j) a[j] -= ep.proprio.at(t, j);
  }
  return a;
}

}  // namespace

Normalizers FitNormalizers(const expert::Dataset& dataset, const policy::PolicyConfig& config) {
  std::vector<std::vector<double>> proprio, actions;
  for (const auto& ep : dataset.episodes) {
    for (int t = 0; t < ep.length(); ++t) {
      proprio.push_back(Row(ep.proprio, t));
      if (!config.relative_actions) {
        actions.push_back(Row(ep.actions, t));
        continue;
      }
      for (int i = 0; i < config.chunk; ++i) actions.push_back(Target(ep, t, i, true));
    }
  }
  if (proprio.empty()) throw InvariantError("cannot fit normalizers on an empty dataset");
  return {policy::Normalizer::Fit(proprio), policy::Normalizer::Fit(actions)};
}

DemoSource::DemoSource(const expert::Dataset& dataset, const Normalizers& norm,
                       const policy::PolicyConfig& config)
    : dataset_(dataset),
      norm_(norm),
      chunk_(config.chunk),
      relative_(config.relative_actions),
      correlation_camera_(config.CorrelationCameraIndex()) {
  if (dataset.episodes.empty()) throw InvariantError("dataset is empty");
  const auto& o = dataset.options;
  if (o.image_height != config.image_height || o.image_width != config.image_width ||
      config.cameras.size() != o.rollout.cameras.size() ||
      config.action_dim != sim::kActionDim) {
    throw ConfigError("dataset and policy disagree on image or action layout");
  }
  for (size_t c = 0; c < config.cameras.size(); ++c) {
    if (config.cameras[c] != o.rollout.cameras[c].id) {
      throw ConfigError("camera order differs between dataset and policy");
    }
  }
}

int DemoSource::NumEpisodes() const {
  return static_cast<int>(dataset_.episodes.size());
}

int DemoSource::EpisodeLength(int episode) const {
  return dataset_.episodes.at(episode).length();
}

policy::TrainingSample DemoSource::Get(int episode, int step) const {
  const expert::DemoEpisode& ep = dataset_.episodes.at(episode);
  const int n = ep.length();
  policy::TrainingSample s;
  s.input.images = expert::EpisodeFrames(dataset_, episode, step);
  s.input.previous =
      step == 0 ? Camera(s.input.images, correlation_camera_)
                : Camera(expert::EpisodeFrames(dataset_, episode, step - 1),
                         correlation_camera_);
  s.input.proprio = ToArray(norm_.proprio.Normalize(Row(ep.proprio, step)));
  const int d = sim::kActionDim;
  s.actions = num::Array<float>({chunk_, d});
  s.mask.assign(chunk_, 0);
  for (int i = 0; i < chunk_; ++i) {
    s.mask[i] = step + i < n ? 1 : 0;
    const std::vector<double> a = norm_.actions.Normalize(Target(ep, step, i, relative_));
    for (int k = 0; k < d; ++k) s.actions.at(i, k) = static_cast<float>(a[k]);
  }
  return s;
}

PolicyController::PolicyController(const policy::ActPolicy<float>& policy,
                                   const Normalizers& norm)
    : policy_(policy),
      norm_(norm),
      buffer_(policy.config().chunk, policy.config().action_dim) {}

void PolicyController::Reset(const sim::Episode&) {
  buffer_ = policy::ChunkBuffer(policy_.config().chunk, policy_.config().action_dim);
  chunks_.clear();
}

sim::Command PolicyController::Act(const sim::Observation& obs) {
  if (obs.images == nullptr || obs.previous == nullptr) {
    throw InvariantError("policy controller needs rendered frames");
  }
  policy::PolicyInput<float> in;
  in.images = *obs.images;
  in.previous = *obs.previous;
  in.proprio = ToArray(norm_.proprio.Normalize(
      std::vector<double>(obs.proprio.begin(), obs.proprio.end())));
  const num::Array<float> chunk = policy_.Predict(in);
  const int k = chunk.shape()[0], d = chunk.shape()[1];
  num::Array<double> actions({k, d});
  metrics::ChunkPrediction record{obs.step, {}};
  for (int i = 0; i < k; ++i) {
    std::vector<double> row(d);
    for (int c = 0; c < d; ++c) row[c] = chunk.at(i, c);
    row = norm_.actions.Denormalize(row);
    if (policy_.config().relative_actions) {
      for (int j = 0; j < sim::kNumJoints; ++j) row[j] += obs.proprio[j];
    }
    for (int c = 0; c < d; ++c) actions.at(i, c) = row[c];
    record.actions.push_back(std::move(row));
  }
  buffer_.Add(obs.step, actions);
  chunks_.push_back(std::move(record));
  const std::vector<double> a = buffer_.Aggregate(obs.step, policy_.config().aggregation);
  sim::Command cmd;
  for (int j = 0; j < sim::kNumJoints; ++j) cmd.joints[j] = a[j];
  cmd.gripper = a[sim::kNumJoints];
  return cmd;
}

sim::RolloutOptions PolicyRolloutOptions(const policy::PolicyConfig& config,
                                         const sim::RolloutOptions& base) {
  sim::RolloutOptions o = base;
  o.cameras = sim::DefaultCameras(config.image_height, config.image_width);
  for (size_t c = 0; c < o.cameras.size(); ++c) {
    if (c >= config.cameras.size() || config.cameras[c] != o.cameras[c].id) {
      throw ConfigError("policy camera order must be global_1, global_2, hand_eye");
    }
  }
  o.correlation_camera = config.CorrelationCameraIndex();
  return o;
}

}  // namespace ifcgrasp::harness
