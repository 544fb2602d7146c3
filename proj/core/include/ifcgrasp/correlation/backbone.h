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

#ifndef IFCGRASP_CORRELATION_BACKBONE_H_
#define IFCGRASP_CORRELATION_BACKBONE_H_

#include <string>
#include <vector>

#include "ifcgrasp/numerics/nn.h"

namespace ifcgrasp::corr {

enum class BackboneKind {
  kStridedConv,  // stack of stride-2 3x3 convolutions
  kResNet18,     // ResNet-18 topology without normalization layers
};

struct BackboneConfig {
  BackboneKind kind = BackboneKind::kStridedConv;
  int downsample = 16;
  int depth = 64;                      // D
  std::vector<int> widths{16, 32, 64, 64};  // last entry must equal depth
  int in_channels = 3;
  bool bias = true;
  num::Activation activation = num::Activation::kGelu;

  static BackboneConfig Desk();
  static BackboneConfig Paper();

  // Throws ConfigError when the stage layout cannot produce `downsample`.
  void Validate() const;
};

// Maps images [N, H', W', C] to feature grids [N, H'/f, W'/f, D].
template <typename T>
class Backbone {
 public:
  Backbone() = default;
  Backbone(num::ParameterStore<T>& store, const std::string& name,
           const BackboneConfig& config, num::CounterRng& rng);

  num::Var<T> Forward(const num::Var<T>& images) const;

  const BackboneConfig& config() const { return config_; }

 private:
  struct BasicBlock {
    num::ConvLayer<T> conv1, conv2, shortcut;
    bool has_shortcut = false;
  };

  BackboneConfig config_;
  std::vector<num::ConvLayer<T>> convs_;  // strided stack, or the ResNet stem
  std::vector<BasicBlock> blocks_;
};

}  // namespace ifcgrasp::corr

#endif  // IFCGRASP_CORRELATION_BACKBONE_H_
