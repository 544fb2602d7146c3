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

#include "ifcgrasp/harness/shapes.h"

#include <chrono>
#include <sstream>

#include "ifcgrasp/correlation/correlation.h"
#include "ifcgrasp/policy/model.h"

namespace ifcgrasp::harness {
namespace {

num::Array<float> Noise(const num::Shape& shape, num::CounterRng& rng) {
  num::Array<float> a(shape);
  for (int64_t i = 0; i < a.size(); ++i) a[i] = static_cast<float>(rng.Uniform());
  return a;
}

std::string Str(const num::Shape& v) {
  std::ostringstream s;
  for (size_t i = 0; i < v.size(); ++i) s << (i ? "x" : "") << v[i];
  return s.str();
}

}  // namespace

nlohmann::json ShapeReport::ToJson() const {
  nlohmann::json chain = nlohmann::json::array();
  for (const auto& [h, w] : cnn_chain) chain.push_back({h, w});
  return {{"preset", preset},
          {"features", features},
          {"cost_volume", cost_volume},
          {"cnn_chain", chain},
          {"motion_tokens", motion_tokens},
          {"motion_dim", motion_dim},
          {"visual_tokens", visual_tokens},
          {"observation_tokens", observation_tokens},
          {"observation_dim", observation_dim},
          {"action_chunk", action_chunk},
          {"seconds", seconds}};
}

ShapeReport MeasureShapes(const policy::PolicyConfig& config, uint64_t seed) {
  config.Validate();
  const auto t0 = std::chrono::steady_clock::now();
  num::NoGradGuard no_grad;
  num::CounterRng rng(seed, 0x5a9e);
  ShapeReport r;
  r.preset = config.preset;
  const int h = config.image_height, w = config.image_width, c = config.image_channels;

  policy::PolicyInput<float> in;
  in.images = Noise({static_cast<int>(config.cameras.size()), h, w, c}, rng);
  in.previous = Noise({h, w, c}, rng);
  in.proprio = Noise({config.action_dim}, rng);

  if (config.use_correlation) {
    num::ParameterStore<float> store;
    num::CounterRng init(seed, 0xc0);
    corr::CorrelationNetwork<float> net(store, "corr", config.correlation, init);
    num::Array<float> frames({2, h, w, c});
    const int cam = config.CorrelationCameraIndex();
    const int64_t plane = static_cast<int64_t>(h) * w * c;
    for (int64_t i = 0; i < plane; ++i) {
      frames[i] = in.images[cam * plane + i];
      frames[plane + i] = in.previous[i];
    }
    corr::CorrelationTrace<float> trace;
    const num::Var<float> tokens = net.Forward(num::Constant(std::move(frames)), &trace);
    r.features = trace.features.shape();
    const int hw = trace.grid_h * trace.grid_w;
    if (trace.cost_volume.shape() == num::Shape{hw, hw}) {
      r.cost_volume = {trace.grid_h, trace.grid_w, trace.grid_h, trace.grid_w};
    } else {
      r.cost_volume = trace.cost_volume.shape();
    }
    r.cnn_chain = trace.cnn_extents;
    r.motion_tokens = tokens.shape()[0];
    r.motion_dim = tokens.shape()[1];
  }

  policy::ActPolicy<float> model(config, seed);
  policy::ObservationLayout layout;
  const num::Var<float> obs = model.AssembleObservation(
      in, num::Constant(num::Array<float>({1, config.latent_dim})), &layout);
  r.visual_tokens = layout.visual;
  r.observation_tokens = obs.shape()[0];
  r.observation_dim = obs.shape()[1];
  r.action_chunk = model.DecodeActions(obs).shape();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<std::string> ShapeMismatches(const ShapeReport& r,
                                         const policy::PolicyConfig& config) {
  std::vector<std::string> out;
  auto expect = [&](const std::string& what, const std::string& got, const std::string& want) {
    if (got != want) out.push_back(what + ": got " + got + ", want " + want);
  };
  auto num = [](int64_t v) { return std::to_string(v); };
  auto chain = [](const std::vector<std::pair<int, int>>& c) {
    std::ostringstream s;
    for (size_t i = 0; i < c.size(); ++i) s << (i ? " -> " : "") << c[i].first << "x" << c[i].second;
    return s.str();
  };

  expect("visual tokens", num(r.visual_tokens), num(config.NumVisualTokens()));
  expect("observation tokens", num(r.observation_tokens), num(config.NumObservationTokens()));
  expect("observation dim", num(r.observation_dim), num(config.model_dim));
  expect("action chunk", Str(r.action_chunk), Str({config.chunk, config.action_dim}));
  if (config.use_correlation) {
    expect("motion tokens", num(r.motion_tokens), num(config.NumMotionTokens()));
    expect("motion dim", num(r.motion_dim), num(config.model_dim));
  }
  if (config.preset == "paper") {
    expect("cost volume", Str(r.cost_volume), "15x20x15x20");
    expect("cnn chain", chain(r.cnn_chain), "15x20 -> 7x10 -> 3x5 -> 2x3");
    expect("motion tokens", num(r.motion_tokens), "600");
    expect("motion dim", num(r.motion_dim), "512");
    expect("visual tokens", num(r.visual_tokens), "900");
    expect("observation tokens", num(r.observation_tokens), "1502");
  }
  return out;
}

}  // namespace ifcgrasp::harness
