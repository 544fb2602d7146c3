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

// Inter-frame correlation network: two frames from one camera become motion
// tokens via an all-pairs cost volume, a small CNN per cost slice, latent-query
// compression and axial self-attention.
//
// Layout conventions (row-major, grid H x W):
//   feature grid        [H * W, D]          row i * W + j
//   cost volume         [H * W, H * W]      entry (i * W + j, k * W + l)
//   cost embedding      [H * W * L, d]      row (i * W + j) * L + m
//   cost encoding       [H * W * 2, d]      row (i * W + j) * 2 + s
//   motion tokens       same as the encoding, flattened in that order

#ifndef IFCGRASP_CORRELATION_CORRELATION_H_
#define IFCGRASP_CORRELATION_CORRELATION_H_

#include <string>
#include <vector>

#include "ifcgrasp/correlation/backbone.h"
#include "ifcgrasp/numerics/nn.h"

namespace ifcgrasp::corr {

struct CorrelationConfig {
  BackboneConfig backbone;
  int embed_dim = 64;  // d_embed
  // Cost-slice CNN: one spec and output width per layer; the last width must
  // equal embed_dim and the last layer has no ReLU.
  std::vector<num::ConvSpec> cnn_specs{{3, 2, 1}, {3, 2, 1}};
  std::vector<int> cnn_channels{32, 64};
  int heads = 4;
  int ffn_hidden = 128;
  int spatial_blocks = 3;
  // CNN and feed-forward nonlinearity. The desk preset uses GELU so that the
  // whole network is smooth (finite-difference checks stay well posed).
  num::Activation activation = num::Activation::kGelu;
  int latent_slots = 2;
  // Divide raw dot products by sqrt(D) before the CNN.
  bool scale_by_sqrt_depth = true;
  std::string camera = "global_1";

  static CorrelationConfig Desk();
  static CorrelationConfig Paper();
  void Validate() const;
};

// values(i, j, k, l) = <f_t(i, j), f_prev(k, l)>. Inputs are [H * W, D] or
// [H, W, D]; output [H * W, H * W].
template <typename T>
num::Var<T> BuildCostVolume(const num::Var<T>& f_t, const num::Var<T>& f_prev);

// Spatial extents after each CNN layer for an h x w cost slice, starting with
// {h, w}. Throws ShapeError on a non-positive extent.
std::vector<std::pair<int, int>> CnnExtents(const CorrelationConfig& config,
                                            int h, int w);

// Maps every cost slice (one row of the volume, an h x w single-channel image)
// to L tokens of width d.
template <typename T>
class CostEmbedder {
 public:
  CostEmbedder() = default;
  CostEmbedder(num::ParameterStore<T>& store, const std::string& name,
               const CorrelationConfig& config, num::CounterRng& rng);
  // cost [h * w, h * w] -> [h * w * L, d].
  num::Var<T> Forward(const num::Var<T>& cost, int h, int w) const;

 private:
  std::vector<num::ConvLayer<T>> layers_;
  int embed_dim_ = 0;
};

// Per-location cross-attention from learned latent queries into the L
// embedding tokens of that location. Query weights are shared by all
// locations.
template <typename T>
class LatentCompressor {
 public:
  LatentCompressor() = default;
  LatentCompressor(num::ParameterStore<T>& store, const std::string& name,
                   const CorrelationConfig& config, num::CounterRng& rng);
  // embedding [locations * L, d] -> [locations * slots, d].
  num::Var<T> Forward(const num::Var<T>& embedding, int locations) const;

 private:
  num::Parameter<T>* queries_ = nullptr;
  num::MultiHeadAttention<T> attn_;
  int slots_ = 0;
};

// Intra-location attention over the slots, then per-slot horizontal (along
// each grid row) and vertical (along each grid column) attention. Each stage
// is a post-norm transformer encoder layer.
template <typename T>
class SpatialAttentionBlock {
 public:
  SpatialAttentionBlock() = default;
  SpatialAttentionBlock(num::ParameterStore<T>& store, const std::string& name,
                        const CorrelationConfig& config, num::CounterRng& rng);
  // encoding [h * w * slots, d] -> same shape.
  num::Var<T> Forward(const num::Var<T>& encoding, int h, int w) const;

 private:
  num::EncoderLayer<T> intra_, horizontal_, vertical_;
  int slots_ = 0;
};

// Intermediate values of one forward pass, kept for shape reporting.
template <typename T>
struct CorrelationTrace {
  num::Var<T> features;      // [2, H, W, D], frame t first
  num::Var<T> cost_volume;   // [H * W, H * W]
  num::Var<T> embedding;     // [H * W * L, d]
  num::Var<T> encoding;      // [H * W * slots, d] before spatial blocks
  num::Var<T> tokens;        // [H * W * slots, d]
  int grid_h = 0;
  int grid_w = 0;
  std::vector<std::pair<int, int>> cnn_extents;
};

template <typename T>
class CorrelationNetwork {
 public:
  CorrelationNetwork() = default;
  CorrelationNetwork(num::ParameterStore<T>& store, const std::string& name,
                     const CorrelationConfig& config, num::CounterRng& rng);

  // frames: [2, H', W', C] with frame t at index 0 and t - 1 at index 1.
  num::Var<T> Forward(const num::Var<T>& frames,
                      CorrelationTrace<T>* trace = nullptr) const;

  // Tokens from precomputed feature grids [H * W, D] (used by tests).
  num::Var<T> FromFeatures(const num::Var<T>& f_t, const num::Var<T>& f_prev,
                           int h, int w, CorrelationTrace<T>* trace) const;

  int NumTokens(int image_h, int image_w) const;
  const CorrelationConfig& config() const { return config_; }
  const Backbone<T>& backbone() const { return backbone_; }

 private:
  CorrelationConfig config_;
  Backbone<T> backbone_;
  CostEmbedder<T> embedder_;
  LatentCompressor<T> compressor_;
  num::Parameter<T>* slot_embedding_ = nullptr;
  std::vector<SpatialAttentionBlock<T>> blocks_;
};

// Fixed positional term added before the spatial blocks: 2-D sinusoid of the
// location, repeated for each slot. [h * w * slots, d].
template <typename T>
num::Array<T> LocationEmbedding(int h, int w, int slots, int dim);

}  // namespace ifcgrasp::corr

#endif  // IFCGRASP_CORRELATION_CORRELATION_H_
