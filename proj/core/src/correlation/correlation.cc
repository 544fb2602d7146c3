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

#include "ifcgrasp/correlation/correlation.h"

#include <cmath>

namespace ifcgrasp::corr {

using num::Array;
using num::Var;

CorrelationConfig CorrelationConfig::Desk() { return CorrelationConfig{}; }

CorrelationConfig CorrelationConfig::Paper() {
  CorrelationConfig c;
  c.backbone = BackboneConfig::Paper();
  c.embed_dim = 512;
  // Reference kernels and strides; paddings reconstructed so that floor
  // semantics give 15x20 -> 7x10 -> 3x5 -> 2x3.
  c.cnn_specs = {{6, 2, 2}, {6, 2, 2}, {6, 2, 3}};
  c.cnn_channels = {128, 256, 512};
  c.heads = 8;
  c.ffn_hidden = 2048;
  c.activation = num::Activation::kRelu;
  return c;
}

void CorrelationConfig::Validate() const {
  backbone.Validate();
  if (embed_dim <= 0 || embed_dim % 4 != 0) {
    throw ConfigError("correlation embed_dim must be a positive multiple of 4");
  }
  if (cnn_specs.empty() || cnn_specs.size() != cnn_channels.size()) {
    throw ConfigError("correlation CNN specs and channels differ in length");
  }
  if (cnn_channels.back() != embed_dim) {
    throw ConfigError("last CNN width must equal embed_dim");
  }
  if (heads <= 0 || embed_dim % heads != 0) {
    throw ConfigError("correlation heads must divide embed_dim");
  }
  if (latent_slots < 1 || spatial_blocks < 0 || ffn_hidden <= 0) {
    throw ConfigError("bad correlation slots/blocks/ffn settings");
  }
}

template <typename T>
Var<T> BuildCostVolume(const Var<T>& f_t, const Var<T>& f_prev) {
  if (f_t.shape() != f_prev.shape()) {
    throw ShapeError("cost volume: feature shapes differ " +
                     num::ShapeString(f_t.shape()) + " vs " +
                     num::ShapeString(f_prev.shape()));
  }
  Var<T> a = f_t, b = f_prev;
  if (f_t.value().rank() == 3) {
    const int hw = f_t.dim(0) * f_t.dim(1);
    a = num::Reshape(f_t, {hw, f_t.dim(2)});
    b = num::Reshape(f_prev, {hw, f_prev.dim(2)});
  } else if (f_t.value().rank() != 2) {
    throw ShapeError("cost volume expects [H, W, D] or [H*W, D] features");
  }
  return num::MatMul(a, b, /*transpose_b=*/true);
}

std::vector<std::pair<int, int>> CnnExtents(const CorrelationConfig& config,
                                            int h, int w) {
  std::vector<std::pair<int, int>> out{{h, w}};
  for (const num::ConvSpec& s : config.cnn_specs) {
    h = num::ConvOutputExtent(h, s.kernel, s.stride, s.pad);
    w = num::ConvOutputExtent(w, s.kernel, s.stride, s.pad);
    out.emplace_back(h, w);
  }
  return out;
}

template <typename T>
CostEmbedder<T>::CostEmbedder(num::ParameterStore<T>& store,
                              const std::string& name,
                              const CorrelationConfig& config,
                              num::CounterRng& rng)
    : embed_dim_(config.embed_dim) {
  int cin = 1;
  for (size_t i = 0; i < config.cnn_specs.size(); ++i) {
    const bool last = i + 1 == config.cnn_specs.size();
    layers_.emplace_back(store, name + ".conv" + std::to_string(i), cin,
                         config.cnn_channels[i], config.cnn_specs[i],
                         last ? num::Activation::kNone : config.activation,
                         rng);
    cin = config.cnn_channels[i];
  }
}

template <typename T>
Var<T> CostEmbedder<T>::Forward(const Var<T>& cost, int h, int w) const {
  const int hw = h * w;
  if (cost.value().rank() != 2 || cost.dim(0) != hw || cost.dim(1) != hw) {
    throw ShapeError("cost embedder expects [" + std::to_string(hw) + ", " +
                     std::to_string(hw) + "], got " +
                     num::ShapeString(cost.shape()));
  }
  Var<T> x = num::Reshape(cost, {hw, h, w, 1});
  for (const auto& layer : layers_) x = layer.Forward(x);
  const int len = x.dim(1) * x.dim(2);
  return num::Reshape(x, {hw * len, embed_dim_});
}

template <typename T>
LatentCompressor<T>::LatentCompressor(num::ParameterStore<T>& store,
                                      const std::string& name,
                                      const CorrelationConfig& config,
                                      num::CounterRng& rng)
    : slots_(config.latent_slots) {
  const int d = config.embed_dim;
  queries_ = &store.Add(
      name + ".queries",
      num::InitArray<T>({slots_, d}, d, d, num::Init::kXavier, rng));
  attn_ = num::MultiHeadAttention<T>(store, name + ".attn", d, config.heads,
                                     rng);
}

template <typename T>
Var<T> LatentCompressor<T>::Forward(const Var<T>& embedding,
                                    int locations) const {
  if (locations <= 0 || embedding.dim(0) % locations != 0) {
    throw ShapeError("compressor: embedding rows not divisible by locations");
  }
  std::vector<int> tile(static_cast<size_t>(locations) * slots_);
  for (size_t r = 0; r < tile.size(); ++r) tile[r] = r % slots_;
  Var<T> q = num::GatherRows<T>(num::Leaf(*queries_), tile);
  return attn_.Forward(q, embedding, embedding, locations);
}

template <typename T>
SpatialAttentionBlock<T>::SpatialAttentionBlock(
    num::ParameterStore<T>& store, const std::string& name,
    const CorrelationConfig& config, num::CounterRng& rng)
    : slots_(config.latent_slots) {
  const int d = config.embed_dim;
  intra_ = num::EncoderLayer<T>(store, name + ".intra", d, config.heads,
                                config.ffn_hidden, rng, config.activation);
  horizontal_ = num::EncoderLayer<T>(store, name + ".horizontal", d,
                                     config.heads, config.ffn_hidden, rng,
                                     config.activation);
  vertical_ = num::EncoderLayer<T>(store, name + ".vertical", d, config.heads,
                                   config.ffn_hidden, rng, config.activation);
}

template <typename T>
Var<T> SpatialAttentionBlock<T>::Forward(const Var<T>& encoding, int h,
                                         int w) const {
  const int s_count = slots_;
  const int rows = h * w * s_count;
  if (encoding.value().rank() != 2 || encoding.dim(0) != rows) {
    throw ShapeError("spatial block expects " + std::to_string(rows) +
                     " rows, got " + num::ShapeString(encoding.shape()));
  }
  // to_h[new] = old for sequences along rows; to_v likewise along columns.
  std::vector<int> to_h(rows), from_h(rows), to_v(rows), from_v(rows);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int s = 0; s < s_count; ++s) {
        const int old = (i * w + j) * s_count + s;
        const int hr = (s * h + i) * w + j;
        const int vr = (s * w + j) * h + i;
        to_h[hr] = old;
        from_h[old] = hr;
        to_v[vr] = old;
        from_v[old] = vr;
      }
    }
  }
  Var<T> x = intra_.Forward(encoding, h * w);
  x = num::GatherRows<T>(x, to_h);
  x = horizontal_.Forward(x, s_count * h);
  x = num::GatherRows<T>(x, from_h);
  x = num::GatherRows<T>(x, to_v);
  x = vertical_.Forward(x, s_count * w);
  return num::GatherRows<T>(x, from_v);
}

template <typename T>
Array<T> LocationEmbedding(int h, int w, int slots, int dim) {
  Array<T> grid = num::Sinusoidal2d<T>(h, w, dim);
  Array<T> out({h * w * slots, dim});
  for (int loc = 0; loc < h * w; ++loc) {
    for (int s = 0; s < slots; ++s) {
      for (int c = 0; c < dim; ++c) {
        out.at(loc * slots + s, c) = grid.at(loc, c);
      }
    }
  }
  return out;
}

template <typename T>
CorrelationNetwork<T>::CorrelationNetwork(num::ParameterStore<T>& store,
                                          const std::string& name,
                                          const CorrelationConfig& config,
                                          num::CounterRng& rng)
    : config_(config) {
  config_.Validate();
  backbone_ = Backbone<T>(store, name + ".backbone", config_.backbone, rng);
  embedder_ = CostEmbedder<T>(store, name + ".embed", config_, rng);
  compressor_ = LatentCompressor<T>(store, name + ".compress", config_, rng);
  const int d = config_.embed_dim;
  slot_embedding_ = &store.Add(
      name + ".slot_embedding",
      num::InitArray<T>({config_.latent_slots, d}, d, d, num::Init::kXavier,
                        rng));
  for (int b = 0; b < config_.spatial_blocks; ++b) {
    blocks_.emplace_back(store, name + ".block" + std::to_string(b), config_,
                         rng);
  }
}

template <typename T>
Var<T> CorrelationNetwork<T>::Forward(const Var<T>& frames,
                                      CorrelationTrace<T>* trace) const {
  if (frames.value().rank() != 4 || frames.dim(0) != 2) {
    throw ShapeError("correlation expects a frame pair [2, H, W, C], got " +
                     num::ShapeString(frames.shape()));
  }
  Var<T> features = backbone_.Forward(frames);
  const int h = features.dim(1), w = features.dim(2), d = features.dim(3);
  Var<T> flat = num::Reshape(features, {2 * h * w, d});
  Var<T> f_t = num::SliceRows(flat, 0, h * w);
  Var<T> f_prev = num::SliceRows(flat, h * w, 2 * h * w);
  if (trace != nullptr) trace->features = features;
  return FromFeatures(f_t, f_prev, h, w, trace);
}

template <typename T>
Var<T> CorrelationNetwork<T>::FromFeatures(const Var<T>& f_t,
                                           const Var<T>& f_prev, int h, int w,
                                           CorrelationTrace<T>* trace) const {
  Var<T> cost = BuildCostVolume(f_t, f_prev);
  if (config_.scale_by_sqrt_depth) {
    cost = num::Scale(cost, static_cast<T>(1.0 / std::sqrt(double(f_t.dim(1)))));
  }
  Var<T> embedding = embedder_.Forward(cost, h, w);
  Var<T> encoding = compressor_.Forward(embedding, h * w);
  const int slots = config_.latent_slots;
  std::vector<int> tile(static_cast<size_t>(h) * w * slots);
  for (size_t r = 0; r < tile.size(); ++r) tile[r] = r % slots;
  Var<T> position = num::Add(
      num::Constant(LocationEmbedding<T>(h, w, slots, config_.embed_dim)),
      num::GatherRows<T>(num::Leaf(*slot_embedding_), tile));
  Var<T> x = num::Add(encoding, position);
  for (const auto& block : blocks_) x = block.Forward(x, h, w);
  if (trace != nullptr) {
    trace->cost_volume = cost;
    trace->embedding = embedding;
    trace->encoding = encoding;
    trace->tokens = x;
    trace->grid_h = h;
    trace->grid_w = w;
    trace->cnn_extents = CnnExtents(config_, h, w);
  }
  return x;
}

template <typename T>
int CorrelationNetwork<T>::NumTokens(int image_h, int image_w) const {
  const int f = config_.backbone.downsample;
  return (image_h / f) * (image_w / f) * config_.latent_slots;
}

#define IFCGRASP_INSTANTIATE(T)                                             \
  template Var<T> BuildCostVolume<T>(const Var<T>&, const Var<T>&);         \
  template class CostEmbedder<T>;                                           \
  template class LatentCompressor<T>;                                       \
  template class SpatialAttentionBlock<T>;                                  \
  template class CorrelationNetwork<T>;                                     \
  template Array<T> LocationEmbedding<T>(int, int, int, int);

IFCGRASP_INSTANTIATE(float)
IFCGRASP_INSTANTIATE(double)
#undef IFCGRASP_INSTANTIATE

}  // namespace ifcgrasp::corr
