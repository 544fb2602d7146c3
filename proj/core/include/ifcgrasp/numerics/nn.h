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

// Parameterized layers built from numerics ops. Layers register their
// parameters in a ParameterStore under a dotted name prefix and keep
// non-owning handles; the store must outlive them.

#ifndef IFCGRASP_NUMERICS_NN_H_
#define IFCGRASP_NUMERICS_NN_H_

#include <string>
#include <vector>

#include "ifcgrasp/numerics/ops.h"
#include "ifcgrasp/numerics/rng.h"

namespace ifcgrasp::num {

enum class Init {
  kXavier,  // uniform, limit sqrt(6 / (fan_in + fan_out))
  kHe,      // normal, std sqrt(2 / fan_in)
  kZero,
};

enum class Activation { kNone, kRelu, kGelu };

template <typename T>
Var<T> Activate(const Var<T>& x, Activation act);

template <typename T>
Array<T> InitArray(const Shape& shape, int fan_in, int fan_out, Init init,
                   CounterRng& rng);

template <typename T>
class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(ParameterStore<T>& store, const std::string& name, int in,
              int out, CounterRng& rng, Init init = Init::kXavier,
              bool bias = true);

  Var<T> Forward(const Var<T>& x) const;
  int in_features() const { return in_; }
  int out_features() const { return out_; }

 private:
  Parameter<T>* weight_ = nullptr;
  Parameter<T>* bias_ = nullptr;
  int in_ = 0;
  int out_ = 0;
};

template <typename T>
class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  LayerNormLayer(ParameterStore<T>& store, const std::string& name, int dim);
  Var<T> Forward(const Var<T>& x) const;

 private:
  Parameter<T>* gamma_ = nullptr;
  Parameter<T>* beta_ = nullptr;
};

// Projected multi-head attention: softmax(QK^T/sqrt(d/h))V per head, heads
// concatenated, then output projection.
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore<T>& store, const std::string& name,
                     int dim, int heads, CounterRng& rng);

  Var<T> Forward(const Var<T>& query, const Var<T>& key, const Var<T>& value,
                 int groups = 1) const;
  int heads() const { return heads_; }

 private:
  LinearLayer<T> q_, k_, v_, o_;
  int heads_ = 1;
};

template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore<T>& store, const std::string& name, int dim,
              int hidden, CounterRng& rng, Activation act = Activation::kRelu);
  Var<T> Forward(const Var<T>& x) const;

 private:
  LinearLayer<T> up_, down_;
  Activation act_ = Activation::kRelu;
};

// Post-norm encoder layer: x = LN(x + SelfAttn(x)); x = LN(x + FFN(x)).
// `groups` splits the rows into independent attention sequences.
template <typename T>
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(ParameterStore<T>& store, const std::string& name, int dim,
               int heads, int hidden, CounterRng& rng,
               Activation act = Activation::kRelu);
  Var<T> Forward(const Var<T>& x, int groups = 1) const;

 private:
  MultiHeadAttention<T> attn_;
  LayerNormLayer<T> norm1_, norm2_;
  FeedForward<T> ffn_;
};

// Post-norm decoder layer with self-attention over the queries, then
// cross-attention into `memory`, then FFN.
template <typename T>
class DecoderLayer {
 public:
  DecoderLayer() = default;
  DecoderLayer(ParameterStore<T>& store, const std::string& name, int dim,
               int heads, int hidden, CounterRng& rng,
               Activation act = Activation::kRelu);
  Var<T> Forward(const Var<T>& target, const Var<T>& memory) const;

 private:
  MultiHeadAttention<T> self_attn_, cross_attn_;
  LayerNormLayer<T> norm1_, norm2_, norm3_;
  FeedForward<T> ffn_;
};

template <typename T>
class ConvLayer {
 public:
  ConvLayer() = default;
  ConvLayer(ParameterStore<T>& store, const std::string& name, int in_channels,
            int out_channels, ConvSpec spec, Activation act, CounterRng& rng,
            bool bias = true);
  // x: [N, H, W, Cin].
  Var<T> Forward(const Var<T>& x) const;
  const ConvSpec& spec() const { return spec_; }
  int out_channels() const { return out_channels_; }

 private:
  Parameter<T>* weight_ = nullptr;
  Parameter<T>* bias_ = nullptr;
  ConvSpec spec_;
  int out_channels_ = 0;
  Activation act_ = Activation::kNone;
};

// Fixed 1-D sinusoidal table [n, dim].
template <typename T>
Array<T> SinusoidalTable(int n, int dim);

// Fixed 2-D sinusoidal table [h * w, dim]: first half of the channels
// encodes the row index, second half the column index. dim % 4 == 0.
template <typename T>
Array<T> Sinusoidal2d(int h, int w, int dim);

}  // namespace ifcgrasp::num

#endif  // IFCGRASP_NUMERICS_NN_H_
