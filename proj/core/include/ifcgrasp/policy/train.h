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

#ifndef IFCGRASP_POLICY_TRAIN_H_
#define IFCGRASP_POLICY_TRAIN_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "ifcgrasp/numerics/optim.h"
#include "ifcgrasp/policy/model.h"

namespace ifcgrasp::policy {

struct TrainingSample {
  PolicyInput<float> input;
  num::Array<float> actions;  // [k, D_a], normalized, padded past the end
  std::vector<uint8_t> mask;  // k entries, prefix-true
};

// Random access to (episode, step) samples.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual int NumEpisodes() const = 0;
  virtual int EpisodeLength(int episode) const = 0;
  virtual TrainingSample Get(int episode, int step) const = 0;
};

struct TrainOptions {
  int steps = 2000;
  int batch_size = 8;
  uint64_t seed = 0;
  num::AdamWOptions optimizer;
  // Cosine decay from the base rate to final_lr_fraction of it over all
  // steps; off keeps the rate constant.
  bool cosine_decay = false;
  double final_lr_fraction = 0.1;
  // Linear ramp from 0 over the first warmup_steps.
  int warmup_steps = 0;
  // Global gradient-norm clip; 0 disables.
  double max_grad_norm = 0.0;
};

// Rate used at `step` (0-based).
double LearningRateAt(const TrainOptions& options, int step);

// Rescales all gradients so their joint L2 norm is at most max_norm.
void ClipGradients(const std::vector<num::Parameter<float>*>& params, double max_norm);

struct TrainStats {
  int step = 0;
  double loss = 0;  // batch mean of the total objective
  double l1 = 0;
  double kl = 0;
};

// One AdamW step per batch; samples draw an episode uniformly, then a step
// uniformly within it. Fully determined by (policy init, data, options).
std::vector<TrainStats> Train(
    ActPolicy<float>& policy, const SampleSource& data,
    const TrainOptions& options,
    const std::function<void(const TrainStats&)>& progress = {});

}  // namespace ifcgrasp::policy

#endif  // IFCGRASP_POLICY_TRAIN_H_
