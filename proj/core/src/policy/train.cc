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

#include "ifcgrasp/policy/train.h"

#include <cmath>
#include <numbers>

namespace ifcgrasp::policy {

double LearningRateAt(const TrainOptions& options, int step) {
  double base = options.optimizer.learning_rate;
  if (step < options.warmup_steps) base *= static_cast<double>(step + 1) / (options.warmup_steps + 1);
  if (!options.cosine_decay || options.steps <= 1) return base;
  const double progress = static_cast<double>(step) / (options.steps - 1);
  const double floor = options.final_lr_fraction;
  return base * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

void ClipGradients(const std::vector<num::Parameter<float>*>& params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params) {
    for (int64_t i = 0; i < p->grad.size(); ++i) sq += static_cast<double>(p->grad[i]) * p->grad[i];
  }
  const double norm = std::sqrt(sq);
  if (!(norm > max_norm)) return;  // NaN falls through to the optimizer's check
  const float s = static_cast<float>(max_norm / norm);
  for (auto* p : params) {
    for (int64_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= s;
  }
}

std::vector<TrainStats> Train(
    ActPolicy<float>& policy, const SampleSource& data,
    const TrainOptions& options,
    const std::function<void(const TrainStats&)>& progress) {
  if (data.NumEpisodes() < 1) throw InvariantError("training set is empty");
  if (options.steps < 0 || options.batch_size < 1 || options.warmup_steps < 0 ||
      !(options.max_grad_norm >= 0.0)) {
    throw ConfigError("training needs steps >= 0, batch_size >= 1 and non-negative schedule terms");
  }
  for (int e = 0; e < data.NumEpisodes(); ++e) {
    if (data.EpisodeLength(e) < 1) throw InvariantError("empty episode in data");
  }
  num::AdamW<float> optimizer(options.optimizer);
  auto params = policy.store().All();
  const num::CounterRng root(options.seed, 0x7a1);
  const float scale = 1.0f / options.batch_size;
  std::vector<TrainStats> curve;
  curve.reserve(options.steps);
  for (int step = 0; step < options.steps; ++step) {
    policy.store().ZeroGrad();
    num::CounterRng rng = root.Fork(step);
    TrainStats stats;
    stats.step = step;
    for (int b = 0; b < options.batch_size; ++b) {
      const int episode = static_cast<int>(rng.UniformInt(0, data.NumEpisodes() - 1));
      const int t = static_cast<int>(rng.UniformInt(0, data.EpisodeLength(episode) - 1));
      TrainingSample sample = data.Get(episode, t);
      LossTerms<float> terms =
          policy.Loss(sample.input, sample.actions, sample.mask, rng);
      stats.loss += terms.total.value()[0] * scale;
      stats.l1 += terms.l1.value()[0] * scale;
      stats.kl += terms.kl.value()[0] * scale;
      num::Backward(num::Scale(terms.total, scale));
    }
    if (options.max_grad_norm > 0.0) ClipGradients(params, options.max_grad_norm);
    optimizer.set_learning_rate(LearningRateAt(options, step));
    optimizer.Step(params);
    curve.push_back(stats);
    if (progress) progress(stats);
  }
  return curve;
}

}  // namespace ifcgrasp::policy
