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

// Glue between demonstrations, the policy and the simulator.

#ifndef IFCGRASP_HARNESS_DEPLOY_H_
#define IFCGRASP_HARNESS_DEPLOY_H_

#include <vector>

#include "ifcgrasp/expert/dataset.h"
#include "ifcgrasp/metrics/metrics.h"
#include "ifcgrasp/policy/aggregation.h"
#include "ifcgrasp/policy/model.h"
#include "ifcgrasp/policy/normalizer.h"
#include "ifcgrasp/policy/train.h"
#include "ifcgrasp/sim/rollout.h"

namespace ifcgrasp::harness {

struct Normalizers {
  policy::Normalizer proprio;
  policy::Normalizer actions;
};

// Action statistics cover every chunk offset when actions are relative.
Normalizers FitNormalizers(const expert::Dataset& dataset, const policy::PolicyConfig& config);

// Samples (episode, t): frames at t, correlation-camera frame at t - 1 (the
// frame at t when t = 0), normalized proprio, and the next k actions padded by
// repeating the last one. Relative policies see joint targets minus the
// joints at t.
class DemoSource : public policy::SampleSource {
 public:
  DemoSource(const expert::Dataset& dataset, const Normalizers& norm,
             const policy::PolicyConfig& config);

  int NumEpisodes() const override;
  int EpisodeLength(int episode) const override;
  policy::TrainingSample Get(int episode, int step) const override;

 private:
  const expert::Dataset& dataset_;
  Normalizers norm_;
  int chunk_;
  bool relative_;
  int correlation_camera_;
};

// Queries the policy every step and executes the temporally aggregated
// action. Records every emitted chunk (de-normalized) for divergence.
class PolicyController : public sim::Controller {
 public:
  PolicyController(const policy::ActPolicy<float>& policy, const Normalizers& norm);

  bool needs_images() const override { return true; }
  void Reset(const sim::Episode& episode) override;
  sim::Command Act(const sim::Observation& obs) override;

  const std::vector<metrics::ChunkPrediction>& chunks() const { return chunks_; }
  const std::vector<metrics::ChunkPrediction>* chunk_history() const override {
    return &chunks_;
  }

 private:
  const policy::ActPolicy<float>& policy_;
  Normalizers norm_;
  policy::ChunkBuffer buffer_;
  std::vector<metrics::ChunkPrediction> chunks_;
};

// Rollout options whose cameras match the policy's image layout.
sim::RolloutOptions PolicyRolloutOptions(const policy::PolicyConfig& config,
                                         const sim::RolloutOptions& base = {});

}  // namespace ifcgrasp::harness

#endif  // IFCGRASP_HARNESS_DEPLOY_H_
