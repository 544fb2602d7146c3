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

#include "ifcgrasp/correlation/backbone.h"

namespace ifcgrasp::corr {

using num::ConvLayer;
using num::ConvSpec;
using num::Var;

BackboneConfig BackboneConfig::Desk() { return BackboneConfig{}; }

BackboneConfig BackboneConfig::Paper() {
  BackboneConfig c;
  c.kind = BackboneKind::kResNet18;
  c.downsample = 32;
  c.depth = 512;
  c.widths = {64, 128, 256, 512};
  c.activation = num::Activation::kRelu;
  return c;
}

void BackboneConfig::Validate() const {
  if (depth <= 0 || in_channels <= 0) {
    throw ConfigError("backbone depth and channels must be positive");
  }
  if (widths.empty() || widths.back() != depth) {
    throw ConfigError("backbone: last stage width must equal depth");
  }
  int expected = 0;
  if (kind == BackboneKind::kStridedConv) {
    expected = 1 << widths.size();
  } else {
    if (widths.size() != 4) throw ConfigError("ResNet-18 needs 4 stages");
    expected = 32;
  }
  if (downsample != expected) {
    throw ConfigError("backbone stages give downsample " +
                      std::to_string(expected) + ", config says " +
                      std::to_string(downsample));
  }
}

template <typename T>
Backbone<T>::Backbone(num::ParameterStore<T>& store, const std::string& name,
                      const BackboneConfig& config, num::CounterRng& rng)
    : config_(config) {
  config_.Validate();
  const bool b = config_.bias;
  const num::Activation act = config_.activation;
  const num::Activation none = num::Activation::kNone;
  if (config_.kind == BackboneKind::kStridedConv) {
    int cin = config_.in_channels;
    for (size_t i = 0; i < config_.widths.size(); ++i) {
      convs_.emplace_back(store, name + ".conv" + std::to_string(i), cin,
                          config_.widths[i], ConvSpec{3, 2, 1}, act, rng, b);
      cin = config_.widths[i];
    }
    return;
  }
  convs_.emplace_back(store, name + ".stem", config_.in_channels,
                      config_.widths[0], ConvSpec{7, 2, 3}, act, rng, b);
  int cin = config_.widths[0];
  for (int stage = 0; stage < 4; ++stage) {
    const int cout = config_.widths[stage];
    for (int j = 0; j < 2; ++j) {
      const int stride = (stage > 0 && j == 0) ? 2 : 1;
      const std::string prefix = name + ".layer" + std::to_string(stage + 1) +
                                 "." + std::to_string(j);
      BasicBlock block;
      block.conv1 = ConvLayer<T>(store, prefix + ".conv1", cin, cout,
                                 ConvSpec{3, stride, 1}, act, rng, b);
      block.conv2 = ConvLayer<T>(store, prefix + ".conv2", cout, cout,
                                 ConvSpec{3, 1, 1}, none, rng, b);
      if (stride != 1 || cin != cout) {
        block.has_shortcut = true;
        block.shortcut = ConvLayer<T>(store, prefix + ".downsample", cin, cout,
                                      ConvSpec{1, stride, 0}, none, rng, b);
      }
      blocks_.push_back(std::move(block));
      cin = cout;
    }
  }
}

template <typename T>
Var<T> Backbone<T>::Forward(const Var<T>& images) const {
  if (images.value().rank() != 4 || images.dim(3) != config_.in_channels) {
    throw ShapeError("backbone expects [N, H, W, " +
                     std::to_string(config_.in_channels) + "], got " +
                     num::ShapeString(images.shape()));
  }
  const int f = config_.downsample;
  if (images.dim(1) % f != 0 || images.dim(2) % f != 0) {
    throw ShapeError("image extents " + std::to_string(images.dim(1)) + "x" +
                     std::to_string(images.dim(2)) +
                     " not divisible by downsample " + std::to_string(f));
  }
  Var<T> x = images;
  if (config_.kind == BackboneKind::kStridedConv) {
    for (const auto& conv : convs_) x = conv.Forward(x);
    return x;
  }
  x = convs_[0].Forward(x);
  x = num::MaxPool2d(x, ConvSpec{3, 2, 1});
  for (const BasicBlock& block : blocks_) {
    Var<T> y = block.conv2.Forward(block.conv1.Forward(x));
    Var<T> skip = block.has_shortcut ? block.shortcut.Forward(x) : x;
    x = num::Activate(num::Add(y, skip), config_.activation);
  }
  return x;
}

template class Backbone<float>;
template class Backbone<double>;

}  // namespace ifcgrasp::corr
