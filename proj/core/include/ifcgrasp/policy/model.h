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

// Action-chunking policy with a CVAE style latent.
//
// Observation token order: [z, proprio, camera 0 grid, camera 1 grid,
// camera 2 grid, motion tokens]. Each grid is flattened row-major.

#ifndef IFCGRASP_POLICY_MODEL_H_
#define IFCGRASP_POLICY_MODEL_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "ifcgrasp/correlation/correlation.h"
#include "ifcgrasp/numerics/nn.h"
#include "ifcgrasp/policy/config.h"

namespace ifcgrasp::policy {

template <typename T>
struct PolicyInput {
  num::Array<T> images;    // [cameras, H, W, C], current frames
  num::Array<T> previous;  // [H, W, C], correlation camera at t - 1
  num::Array<T> proprio;   // [D_a], normalized
};

template <typename T>
struct StyleLatent {
  num::Var<T> mu;      // [1, d_z]
  num::Var<T> logvar;  // [1, d_z]
};

template <typename T>
struct LossTerms {
  num::Var<T> total;
  num::Var<T> l1;
  num::Var<T> kl;
};

// Token counts of one assembled observation.
struct ObservationLayout {
  int latent = 0;
  int proprio = 0;
  int visual = 0;
  int motion = 0;
  int total() const { return latent + proprio + visual + motion; }
};

template <typename T>
class ActPolicy {
 public:
  ActPolicy(const PolicyConfig& config, uint64_t seed);
  ActPolicy(const ActPolicy&) = delete;
  ActPolicy& operator=(const ActPolicy&) = delete;

  // Posterior q(z | proprio, actions). proprio [D_a], actions [k, D_a].
  StyleLatent<T> EncodeStyle(const num::Array<T>& proprio,
                             const num::Array<T>& actions) const;

  // z: [1, d_z]. Returns [N_obs, d_m].
  num::Var<T> AssembleObservation(const PolicyInput<T>& input,
                                  const num::Var<T>& z,
                                  ObservationLayout* layout = nullptr) const;

  // [N_obs, d_m] -> normalized chunk [k, D_a].
  num::Var<T> DecodeActions(const num::Var<T>& observation) const;

  // Masked L1 over valid steps plus beta * KL; z is drawn with `noise`.
  LossTerms<T> Loss(const PolicyInput<T>& input, const num::Array<T>& actions,
                    const std::vector<uint8_t>& mask,
                    num::CounterRng& noise) const;

  // z = 0, no graph. Returns the normalized chunk [k, D_a].
  num::Array<T> Predict(const PolicyInput<T>& input) const;

  num::ParameterStore<T>& store() { return *store_; }
  const num::ParameterStore<T>& store() const { return *store_; }
  const PolicyConfig& config() const { return config_; }

 private:
  void CheckInput(const PolicyInput<T>& input) const;

  PolicyConfig config_;
  std::unique_ptr<num::ParameterStore<T>> store_;

  // Style encoder.
  num::Parameter<T>* cls_ = nullptr;
  num::LinearLayer<T> style_proprio_, style_action_, style_out_;
  std::vector<num::EncoderLayer<T>> style_layers_;
  num::Array<T> style_position_;  // fixed [k + 2, d_m]

  // Observation.
  num::LinearLayer<T> latent_proj_, proprio_proj_, visual_proj_, motion_proj_;
  std::vector<corr::Backbone<T>> visual_backbones_;
  std::unique_ptr<corr::CorrelationNetwork<T>> correlation_;
  num::Parameter<T>* obs_position_ = nullptr;  // learned [N_obs, d_m]

  // Encoder-decoder.
  std::vector<num::EncoderLayer<T>> encoder_;
  std::vector<num::DecoderLayer<T>> decoder_;
  num::Parameter<T>* queries_ = nullptr;  // [k, d_m]
  num::LinearLayer<T> head_;
};

}  // namespace ifcgrasp::policy

#endif  // IFCGRASP_POLICY_MODEL_H_
