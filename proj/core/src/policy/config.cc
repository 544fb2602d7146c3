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

#include "ifcgrasp/policy/config.h"

#include <algorithm>

namespace ifcgrasp::policy {

PolicyConfig PolicyConfig::Desk() { return PolicyConfig{}; }

PolicyConfig PolicyConfig::Paper() {
  PolicyConfig c;
  c.preset = "paper";
  c.model_dim = 512;
  c.chunk = 20;
  c.action_dim = 7;
  c.style_layers = 4;
  c.encoder_layers = 4;
  c.decoder_layers = 7;
  c.heads = 8;
  c.ffn_hidden = 3200;
  c.activation = num::Activation::kRelu;
  c.relative_actions = false;
  c.image_height = 480;
  c.image_width = 640;
  c.visual_backbone = corr::BackboneConfig::Paper();
  c.correlation = corr::CorrelationConfig::Paper();
  return c;
}

PolicyConfig PolicyConfig::FromPreset(const std::string& name) {
  if (name == "desk") return Desk();
  if (name == "paper") return Paper();
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

void PolicyConfig::Validate() const {
  if (model_dim <= 0 || heads <= 0 || model_dim % heads != 0) {
    throw ConfigError("model_dim must be a positive multiple of heads");
  }
  if (chunk < 1) throw ConfigError("chunk length k must be >= 1");
  if (action_dim < 1 || latent_dim < 1 || ffn_hidden < 1) {
    throw ConfigError("action_dim, latent_dim and ffn_hidden must be positive");
  }
  if (style_layers < 1 || encoder_layers < 1 || decoder_layers < 1) {
    throw ConfigError("layer counts must be positive");
  }
  if (!(kl_weight >= 0.0)) throw ConfigError("kl_weight must be >= 0");
  if (!(aggregation >= 0.0)) throw ConfigError("aggregation must be >= 0");
  if (cameras.size() != 3) throw ConfigError("exactly three cameras expected");
  visual_backbone.Validate();
  const int f = visual_backbone.downsample;
  if (image_height % f != 0 || image_width % f != 0) {
    throw ConfigError("image extents must be divisible by the downsample");
  }
  if (image_channels != visual_backbone.in_channels) {
    throw ConfigError("image channels differ from backbone input channels");
  }
  if (use_correlation) {
    correlation.Validate();
    if (correlation.backbone.downsample != f) {
      throw ConfigError("correlation and visual backbones must share a grid");
    }
    CorrelationCameraIndex();
  }
  if (preset == "paper") {
    if (style_layers != 4 || encoder_layers != 4 || decoder_layers != 7) {
      throw ConfigError("paper preset layer counts are fixed at 4/4/7");
    }
    if (NumObservationTokens() != 1502) {
      throw ConfigError("paper preset must give 1502 observation tokens");
    }
  }
}

int PolicyConfig::NumVisualTokens() const {
  return static_cast<int>(cameras.size()) * GridHeight() * GridWidth();
}

int PolicyConfig::NumMotionTokens() const {
  if (!use_correlation) return 0;
  return correlation.latent_slots * GridHeight() * GridWidth();
}

int PolicyConfig::NumObservationTokens() const {
  return 2 + NumVisualTokens() + NumMotionTokens();
}

int PolicyConfig::CorrelationCameraIndex() const {
  auto it = std::find(cameras.begin(), cameras.end(), correlation.camera);
  if (it == cameras.end()) {
    throw ConfigError("correlation camera '" + correlation.camera +
                      "' is not in the camera list");
  }
  return static_cast<int>(it - cameras.begin());
}

}  // namespace ifcgrasp::policy
