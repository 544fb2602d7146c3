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

#include "ifcgrasp/numerics/nn.h"

#include <cmath>

namespace ifcgrasp::num {

template <typename T>
Var<T> Activate(const Var<T>& x, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return Relu(x);
    case Activation::kGelu:
      return Gelu(x);
    case Activation::kNone:
      break;
  }
  return x;
}

template <typename T>
Array<T> InitArray(const Shape& shape, int fan_in, int fan_out, Init init,
                   CounterRng& rng) {
  Array<T> a(shape);
  switch (init) {
    case Init::kZero:
      break;
    case Init::kXavier: {
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (int64_t i = 0; i < a.size(); ++i) {
        a[i] = static_cast<T>(rng.Uniform(-limit, limit));
      }
      break;
    }
    case Init::kHe: {
      const double std = std::sqrt(2.0 / fan_in);
      for (int64_t i = 0; i < a.size(); ++i) {
        a[i] = static_cast<T>(std * rng.Normal());
      }
      break;
    }
  }
  return a;
}

template <typename T>
LinearLayer<T>::LinearLayer(ParameterStore<T>& store, const std::string& name,
                            int in, int out, CounterRng& rng, Init init,
                            bool bias)
    : in_(in), out_(out) {
  weight_ = &store.Add(name + ".weight",
                       InitArray<T>({in, out}, in, out, init, rng));
  if (bias) bias_ = &store.Add(name + ".bias", Array<T>({out}));
}

template <typename T>
Var<T> LinearLayer<T>::Forward(const Var<T>& x) const {
  Var<T> w = Leaf(*weight_);
  if (bias_ == nullptr) return Linear<T>(x, w, nullptr);
  Var<T> b = Leaf(*bias_);
  return Linear<T>(x, w, &b);
}

template <typename T>
LayerNormLayer<T>::LayerNormLayer(ParameterStore<T>& store,
                                  const std::string& name, int dim) {
  gamma_ = &store.Add(name + ".gamma", Array<T>::Filled({dim}, T(1)));
  beta_ = &store.Add(name + ".beta", Array<T>({dim}));
}

template <typename T>
Var<T> LayerNormLayer<T>::Forward(const Var<T>& x) const {
  return LayerNormRows<T>(x, Leaf(*gamma_), Leaf(*beta_));
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParameterStore<T>& store,
                                          const std::string& name, int dim,
                                          int heads, CounterRng& rng)
    : q_(store, name + ".q", dim, dim, rng),
      k_(store, name + ".k", dim, dim, rng),
      v_(store, name + ".v", dim, dim, rng),
      o_(store, name + ".o", dim, dim, rng),
      heads_(heads) {
  if (heads < 1 || dim % heads != 0) {
    throw ShapeError("attention width " + std::to_string(dim) +
                     " not divisible by " + std::to_string(heads) + " heads");
  }
}

template <typename T>
Var<T> MultiHeadAttention<T>::Forward(const Var<T>& query, const Var<T>& key,
                                      const Var<T>& value, int groups) const {
  Var<T> q = q_.Forward(query);
  Var<T> k = k_.Forward(key);
  Var<T> v = v_.Forward(value);
  return o_.Forward(Attention<T>(q, k, v, heads_, groups));
}

template <typename T>
FeedForward<T>::FeedForward(ParameterStore<T>& store, const std::string& name,
                            int dim, int hidden, CounterRng& rng,
                            Activation act)
    : up_(store, name + ".up", dim, hidden, rng, Init::kHe),
      down_(store, name + ".down", hidden, dim, rng),
      act_(act) {}

template <typename T>
Var<T> FeedForward<T>::Forward(const Var<T>& x) const {
  return down_.Forward(Activate(up_.Forward(x), act_));
}

template <typename T>
EncoderLayer<T>::EncoderLayer(ParameterStore<T>& store, const std::string& name,
                              int dim, int heads, int hidden, CounterRng& rng,
                              Activation act)
    : attn_(store, name + ".self_attn", dim, heads, rng),
      norm1_(store, name + ".norm1", dim),
      norm2_(store, name + ".norm2", dim),
      ffn_(store, name + ".ffn", dim, hidden, rng, act) {}

template <typename T>
Var<T> EncoderLayer<T>::Forward(const Var<T>& x, int groups) const {
  Var<T> h = norm1_.Forward(Add(x, attn_.Forward(x, x, x, groups)));
  return norm2_.Forward(Add(h, ffn_.Forward(h)));
}

template <typename T>
DecoderLayer<T>::DecoderLayer(ParameterStore<T>& store, const std::string& name,
                              int dim, int heads, int hidden, CounterRng& rng,
                              Activation act)
    : self_attn_(store, name + ".self_attn", dim, heads, rng),
      cross_attn_(store, name + ".cross_attn", dim, heads, rng),
      norm1_(store, name + ".norm1", dim),
      norm2_(store, name + ".norm2", dim),
      norm3_(store, name + ".norm3", dim),
      ffn_(store, name + ".ffn", dim, hidden, rng, act) {}

template <typename T>
Var<T> DecoderLayer<T>::Forward(const Var<T>& target,
                                const Var<T>& memory) const {
  Var<T> h = norm1_.Forward(
      Add(target, self_attn_.Forward(target, target, target)));
  h = norm2_.Forward(Add(h, cross_attn_.Forward(h, memory, memory)));
  return norm3_.Forward(Add(h, ffn_.Forward(h)));
}

template <typename T>
ConvLayer<T>::ConvLayer(ParameterStore<T>& store, const std::string& name,
                        int in_channels, int out_channels, ConvSpec spec,
                        Activation act, CounterRng& rng, bool bias)
    : spec_(spec), out_channels_(out_channels), act_(act) {
  const int fan_in = spec.kernel * spec.kernel * in_channels;
  weight_ = &store.Add(name + ".weight",
                       InitArray<T>({fan_in, out_channels}, fan_in,
                                    out_channels, Init::kHe, rng));
  if (bias) bias_ = &store.Add(name + ".bias", Array<T>({out_channels}));
}

template <typename T>
Var<T> ConvLayer<T>::Forward(const Var<T>& x) const {
  Var<T> w = Leaf(*weight_);
  Var<T> y;
  if (bias_ != nullptr) {
    Var<T> b = Leaf(*bias_);
    y = Conv2d<T>(x, w, &b, spec_);
  } else {
    y = Conv2d<T>(x, w, nullptr, spec_);
  }
  return Activate(y, act_);
}

template <typename T>
Array<T> SinusoidalTable(int n, int dim) {
  Array<T> table({n, dim});
  for (int pos = 0; pos < n; ++pos) {
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -2.0 * (i / 2) / dim);
      const double angle = pos * freq;
      table.at(pos, i) = static_cast<T>(i % 2 == 0 ? std::sin(angle)
                                                   : std::cos(angle));
    }
  }
  return table;
}

template <typename T>
Array<T> Sinusoidal2d(int h, int w, int dim) {
  if (dim % 4 != 0) throw ShapeError("Sinusoidal2d needs dim % 4 == 0");
  const int half = dim / 2;
  Array<T> rows = SinusoidalTable<T>(h, half);
  Array<T> cols = SinusoidalTable<T>(w, half);
  Array<T> table({h * w, dim});
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < half; ++c) {
        table.at(i * w + j, c) = rows.at(i, c);
        table.at(i * w + j, half + c) = cols.at(j, c);
      }
    }
  }
  return table;
}

#define IFCGRASP_INSTANTIATE_NN(T)                                          \
  template Array<T> InitArray<T>(const Shape&, int, int, Init, CounterRng&); \
  template Var<T> Activate<T>(const Var<T>&, Activation);                  \
  template class LinearLayer<T>;                                            \
  template class LayerNormLayer<T>;                                         \
  template class MultiHeadAttention<T>;                                     \
  template class FeedForward<T>;                                            \
  template class EncoderLayer<T>;                                           \
  template class DecoderLayer<T>;                                           \
  template class ConvLayer<T>;                                              \
  template Array<T> SinusoidalTable<T>(int, int);                           \
  template Array<T> Sinusoidal2d<T>(int, int, int);

IFCGRASP_INSTANTIATE_NN(float)
IFCGRASP_INSTANTIATE_NN(double)

#undef IFCGRASP_INSTANTIATE_NN

}  // namespace ifcgrasp::num
