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

#ifndef IFCGRASP_POLICY_CONFIG_H_
#define IFCGRASP_POLICY_CONFIG_H_

#include <string>
#include <vector>

#include "ifcgrasp/correlation/correlation.h"

namespace ifcgrasp::policy {

struct PolicyConfig {
  std::string preset = "desk";
  int model_dim = 64;   // d_m
  int chunk = 10;       // k
  int action_dim = 4;   // D_a: joints then gripper
  int latent_dim = 32;  // d_z
  int style_layers = 2;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int heads = 4;
  int ffn_hidden = 256;
  double kl_weight = 10.0;   // beta
  double aggregation = 0.1;  // m_agg
  // Joint actions are learned as offsets from the joints observed at the
  // chunk's emission step; the gripper stays absolute.
  bool relative_actions = true;
  num::Activation activation = num::Activation::kGelu;

  // Camera order for the image stack; the correlation camera is looked up by
  // name in this list.
  std::vector<std::string> cameras{"global_1", "global_2", "hand_eye"};
  int image_height = 64;
  int image_width = 80;
  int image_channels = 3;

  corr::BackboneConfig visual_backbone = corr::BackboneConfig::Desk();
  bool use_correlation = true;
  corr::CorrelationConfig correlation = corr::CorrelationConfig::Desk();

  static PolicyConfig Desk();
  static PolicyConfig Paper();
  // Throws ConfigError for unknown names.
  static PolicyConfig FromPreset(const std::string& name);

  void Validate() const;

  int GridHeight() const { return image_height / visual_backbone.downsample; }
  int GridWidth() const { return image_width / visual_backbone.downsample; }
  int NumVisualTokens() const;
  int NumMotionTokens() const;
  int NumObservationTokens() const;
  int CorrelationCameraIndex() const;
};

}  // namespace ifcgrasp::policy

#endif  // IFCGRASP_POLICY_CONFIG_H_
