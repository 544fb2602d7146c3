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

#include "ifcgrasp/policy/model.h"

#include <algorithm>
#include <string>

namespace ifcgrasp::policy {

using num::Array;
using num::Constant;
using num::CounterRng;
using num::Init;
using num::Var;

namespace {

template <typename T>
Array<T> SliceImage(const Array<T>& stack, int index) {
  const int h = stack.dim(1), w = stack.dim(2), c = stack.dim(3);
  const int64_t n = static_cast<int64_t>(h) * w * c;
  Array<T> out({1, h, w, c});
  std::copy(stack.data() + index * n, stack.data() + (index + 1) * n,
            out.data());
  return out;
}

}  // namespace

template <typename T>
ActPolicy<T>::ActPolicy(const PolicyConfig& config, uint64_t seed)
    : config_(config), store_(std::make_unique<num::ParameterStore<T>>()) {
  config_.Validate();
  const int d = config_.model_dim, da = config_.action_dim,
            dz = config_.latent_dim, k = config_.chunk;
  const int heads = config_.heads, hidden = config_.ffn_hidden;
  const num::Activation act = config_.activation;
  num::ParameterStore<T>& s = *store_;
  const CounterRng root(seed, 0x5017);

  CounterRng rng = root.Fork(1);
  cls_ = &s.Add("style.cls", num::InitArray<T>({1, d}, d, d, Init::kXavier, rng));
  style_proprio_ = num::LinearLayer<T>(s, "style.proprio", da, d, rng);
  style_action_ = num::LinearLayer<T>(s, "style.action", da, d, rng);
  for (int i = 0; i < config_.style_layers; ++i) {
    style_layers_.emplace_back(s, "style.layer" + std::to_string(i), d, heads,
                               hidden, rng, act);
  }
  // Zero init: mu = 0, log sigma^2 = 0 before the first update.
  style_out_ = num::LinearLayer<T>(s, "style.out", d, 2 * dz, rng, Init::kZero);
  style_position_ = num::SinusoidalTable<T>(k + 2, d);

  rng = root.Fork(2);
  latent_proj_ = num::LinearLayer<T>(s, "obs.latent", dz, d, rng);
  proprio_proj_ = num::LinearLayer<T>(s, "obs.proprio", da, d, rng);
  visual_proj_ = num::LinearLayer<T>(s, "obs.visual", config_.visual_backbone.depth,
                                     d, rng);
  for (size_t c = 0; c < config_.cameras.size(); ++c) {
    CounterRng brng = root.Fork(3 + c);
    visual_backbones_.emplace_back(s, "obs.backbone." + config_.cameras[c],
                                   config_.visual_backbone, brng);
  }
  if (config_.use_correlation) {
    CounterRng crng = root.Fork(10);
    correlation_ = std::make_unique<corr::CorrelationNetwork<T>>(
        s, "corr", config_.correlation, crng);
    motion_proj_ = num::LinearLayer<T>(s, "obs.motion",
                                       config_.correlation.embed_dim, d, crng);
  }
  rng = root.Fork(11);
  const int n_obs = config_.NumObservationTokens();
  obs_position_ = &s.Add("obs.position", num::InitArray<T>({n_obs, d}, n_obs, d,
                                                           Init::kXavier, rng));

  rng = root.Fork(20);
  for (int i = 0; i < config_.encoder_layers; ++i) {
    encoder_.emplace_back(s, "encoder.layer" + std::to_string(i), d, heads,
                          hidden, rng, act);
  }
  rng = root.Fork(30);
  queries_ = &s.Add("decoder.queries",
                    num::InitArray<T>({k, d}, k, d, Init::kXavier, rng));
  for (int i = 0; i < config_.decoder_layers; ++i) {
    decoder_.emplace_back(s, "decoder.layer" + std::to_string(i), d, heads,
                          hidden, rng, act);
  }
  head_ = num::LinearLayer<T>(s, "decoder.head", d, da, rng, Init::kZero);
}

template <typename T>
void ActPolicy<T>::CheckInput(const PolicyInput<T>& input) const {
  const num::Shape want{static_cast<int>(config_.cameras.size()),
                        config_.image_height, config_.image_width,
                        config_.image_channels};
  if (input.images.shape() != want) {
    throw ShapeError("policy images: expected " + num::ShapeString(want) +
                     ", got " + num::ShapeString(input.images.shape()));
  }
  if (config_.use_correlation &&
      input.previous.shape() != num::Shape(want.begin() + 1, want.end())) {
    throw ShapeError("policy previous frame has shape " +
                     num::ShapeString(input.previous.shape()));
  }
  if (input.proprio.size() != config_.action_dim) {
    throw ShapeError("proprioception must have D_a entries");
  }
}

template <typename T>
StyleLatent<T> ActPolicy<T>::EncodeStyle(const Array<T>& proprio,
                                         const Array<T>& actions) const {
  const int k = config_.chunk, da = config_.action_dim;
  if (actions.shape() != num::Shape{k, da}) {
    throw ShapeError("style encoder expects actions [" + std::to_string(k) +
                     ", " + std::to_string(da) + "], got " +
                     num::ShapeString(actions.shape()));
  }
  if (proprio.size() != da) throw ShapeError("proprio must have D_a entries");
  std::vector<Var<T>> parts{
      num::Leaf(*cls_),
      style_proprio_.Forward(Constant(proprio.Reshaped({1, da}))),
      style_action_.Forward(Constant(actions))};
  Var<T> x = num::Add(num::ConcatRows<T>(parts), Constant(style_position_));
  for (const auto& layer : style_layers_) x = layer.Forward(x);
  Var<T> out = style_out_.Forward(num::SliceRows(x, 0, 1));
  const int dz = config_.latent_dim;
  return {num::SliceCols(out, 0, dz), num::SliceCols(out, dz, 2 * dz)};
}

template <typename T>
Var<T> ActPolicy<T>::AssembleObservation(const PolicyInput<T>& input,
                                         const Var<T>& z,
                                         ObservationLayout* layout) const {
  CheckInput(input);
  if (z.shape() != num::Shape{1, config_.latent_dim}) {
    throw ShapeError("style latent must be [1, d_z]");
  }
  const int da = config_.action_dim;
  std::vector<Var<T>> parts;
  parts.push_back(latent_proj_.Forward(z));
  parts.push_back(
      proprio_proj_.Forward(Constant(input.proprio.Reshaped({1, da}))));
  int visual = 0;
  for (size_t c = 0; c < visual_backbones_.size(); ++c) {
    Var<T> f = visual_backbones_[c].Forward(
        Constant(SliceImage(input.images, static_cast<int>(c))));
    const int hw = f.dim(1) * f.dim(2);
    visual += hw;
    parts.push_back(
        visual_proj_.Forward(num::Reshape(f, {hw, f.dim(3)})));
  }
  int motion = 0;
  if (correlation_ != nullptr) {
    const int ci = config_.CorrelationCameraIndex();
    Array<T> current = SliceImage(input.images, ci);
    Array<T> pair({2, config_.image_height, config_.image_width,
                   config_.image_channels});
    std::copy(current.data(), current.data() + current.size(), pair.data());
    std::copy(input.previous.data(), input.previous.data() + current.size(),
              pair.data() + current.size());
    Var<T> tokens = correlation_->Forward(Constant(pair));
    motion = tokens.dim(0);
    parts.push_back(motion_proj_.Forward(tokens));
  }
  if (layout != nullptr) *layout = ObservationLayout{1, 1, visual, motion};
  Var<T> obs = num::ConcatRows<T>(parts);
  if (obs.dim(0) != obs_position_->value.dim(0)) {
    throw ShapeError("observation has " + std::to_string(obs.dim(0)) +
                     " tokens, positional table has " +
                     std::to_string(obs_position_->value.dim(0)));
  }
  return num::Add(obs, num::Leaf(*obs_position_));
}

template <typename T>
Var<T> ActPolicy<T>::DecodeActions(const Var<T>& observation) const {
  Var<T> memory = observation;
  for (const auto& layer : encoder_) memory = layer.Forward(memory);
  Var<T> x = num::Leaf(*queries_);
  for (const auto& layer : decoder_) x = layer.Forward(x, memory);
  return head_.Forward(x);
}

template <typename T>
LossTerms<T> ActPolicy<T>::Loss(const PolicyInput<T>& input,
                                const Array<T>& actions,
                                const std::vector<uint8_t>& mask,
                                CounterRng& noise) const {
  if (static_cast<int>(mask.size()) != config_.chunk) {
    throw ShapeError("mask length must equal chunk length");
  }
  StyleLatent<T> style = EncodeStyle(input.proprio, actions);
  Array<T> eps({1, config_.latent_dim});
  for (int64_t i = 0; i < eps.size(); ++i) eps[i] = static_cast<T>(noise.Normal());
  Var<T> sigma = num::Exp(num::Scale(style.logvar, T(0.5)));
  Var<T> z = num::Add(style.mu, num::Mul(sigma, Constant(eps)));
  Var<T> pred = DecodeActions(AssembleObservation(input, z));
  LossTerms<T> terms;
  terms.l1 = num::MaskedL1(pred, actions, mask);
  terms.kl = num::GaussianKl(style.mu, style.logvar);
  terms.total = config_.kl_weight == 0.0
                    ? terms.l1
                    : num::Add(terms.l1,
                               num::Scale(terms.kl,
                                          static_cast<T>(config_.kl_weight)));
  return terms;
}

template <typename T>
Array<T> ActPolicy<T>::Predict(const PolicyInput<T>& input) const {
  num::NoGradGuard no_grad;
  Var<T> z = Constant(Array<T>({1, config_.latent_dim}));
  return DecodeActions(AssembleObservation(input, z)).value();
}

template class ActPolicy<float>;
template class ActPolicy<double>;

}  // namespace ifcgrasp::policy
