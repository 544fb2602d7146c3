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

// Differentiable primitives. All ops are instantiated for float (training and
// evaluation) and double (gradient verification).

#ifndef IFCGRASP_NUMERICS_OPS_H_
#define IFCGRASP_NUMERICS_OPS_H_

#include <span>
#include <vector>

#include "ifcgrasp/numerics/autodiff.h"

namespace ifcgrasp::num {

struct ConvSpec {
  int kernel = 1;
  int stride = 1;
  int pad = 0;
};

// floor((in + 2*pad - kernel) / stride) + 1. Throws if the result is < 1.
int ConvOutputExtent(int in, int kernel, int stride, int pad);

// 2-D products. `b` is used transposed when `transpose_b` is set.
template <typename T>
Var<T> MatMul(const Var<T>& a, const Var<T>& b, bool transpose_b = false);

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> Sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> Scale(const Var<T>& a, T s);
template <typename T>
Var<T> AddScalar(const Var<T>& a, T s);

// a: [n, d], v: d elements (any shape). Adds v to every row.
template <typename T>
Var<T> AddRowVector(const Var<T>& a, const Var<T>& v);

// x [n, in] * w [in, out] (+ b [out]).
template <typename T>
Var<T> Linear(const Var<T>& x, const Var<T>& w, const Var<T>* b);

template <typename T>
Var<T> Relu(const Var<T>& a);
// x * Phi(x) with the exact normal CDF.
template <typename T>
Var<T> Gelu(const Var<T>& a);
template <typename T>
Var<T> Exp(const Var<T>& a);
template <typename T>
Var<T> Square(const Var<T>& a);
template <typename T>
Var<T> Abs(const Var<T>& a);

// Row-wise softmax of a 2-D array.
template <typename T>
Var<T> SoftmaxRows(const Var<T>& a);

// Row-wise (x - mean) / sqrt(var + eps) * gamma + beta; gamma, beta: [d].
template <typename T>
Var<T> LayerNormRows(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                     T eps = T(1e-5));

// x: [N, H, W, Cin]; w: [K*K*Cin, Cout] with rows ordered (ky, kx, cin);
// b: [Cout] or null. Returns [N, H', W', Cout] with floor output extents.
template <typename T>
Var<T> Conv2d(const Var<T>& x, const Var<T>& w, const Var<T>* b,
              const ConvSpec& spec);

// x: [N, H, W, C]; max over K x K windows, padding treated as -inf.
template <typename T>
Var<T> MaxPool2d(const Var<T>& x, const ConvSpec& spec);

template <typename T>
Var<T> Reshape(const Var<T>& a, Shape shape);
template <typename T>
Var<T> Transpose(const Var<T>& a);

// 2-D arrays with equal column counts, stacked vertically.
template <typename T>
Var<T> ConcatRows(std::span<const Var<T>> parts);
template <typename T>
Var<T> SliceRows(const Var<T>& a, int begin, int end);
template <typename T>
Var<T> SliceCols(const Var<T>& a, int begin, int end);

// out[i] = a[index[i]] row-wise; repeated indices are allowed (embedding
// lookup, tiling, permutation).
template <typename T>
Var<T> GatherRows(const Var<T>& a, std::span<const int> index);

// Fused multi-head scaled dot-product attention without projections.
// q: [G*nq, d], k, v: [G*nk, d]. Rows are split into `groups` contiguous
// independent blocks; each head h attends with softmax(q_h k_h^T/sqrt(d/h)).
template <typename T>
Var<T> Attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, int heads,
                 int groups = 1);

template <typename T>
Var<T> Sum(const Var<T>& a);
template <typename T>
Var<T> Mean(const Var<T>& a);

// Sum over rows with mask[r] != 0 of |pred - target|, divided by
// (cols * valid rows). pred, target: [rows, cols]. Throws on empty mask.
template <typename T>
Var<T> MaskedL1(const Var<T>& pred, const Array<T>& target,
                std::span<const uint8_t> mask);

// KL(N(mu, exp(logvar)) || N(0, I)) = 0.5 * sum(mu^2 + exp(lv) - 1 - lv).
template <typename T>
Var<T> GaussianKl(const Var<T>& mu, const Var<T>& logvar);

}  // namespace ifcgrasp::num

#endif  // IFCGRASP_NUMERICS_OPS_H_
