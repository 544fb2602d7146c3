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

#include "ifcgrasp/numerics/ops.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ifcgrasp::num {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using CMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using CStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
CMatMap<T> AsMat(const Array<T>& a) {
  return CMatMap<T>(a.data(), a.dim(0), a.dim(1));
}
template <typename T>
MatMap<T> AsMat(Array<T>& a) {
  return MatMap<T>(a.data(), a.dim(0), a.dim(1));
}

void Require2d(const Shape& s, const char* op) {
  if (s.size() != 2) {
    throw ShapeError(std::string(op) + " expects a 2-D array, got " +
                     ShapeString(s));
  }
}

void RequireSame(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + " shape mismatch: " + ShapeString(a) +
                     " vs " + ShapeString(b));
  }
}

// Gradient buffer of input `i`, or null when it does not need one.
template <typename T>
Array<T>* GradOf(Node<T>& n, size_t i) {
  Node<T>* in = n.inputs[i].get();
  return in->requires_grad ? &in->GradBuffer() : nullptr;
}

template <typename T>
void AddInto(Array<T>& dst, const Array<T>& src) {
  T* d = dst.data();
  const T* s = src.data();
  for (int64_t i = 0; i < src.size(); ++i) d[i] += s[i];
}

}  // namespace

int ConvOutputExtent(int in, int kernel, int stride, int pad) {
  if (kernel < 1 || stride < 1 || pad < 0) {
    throw ShapeError("convolution requires kernel, stride >= 1 and pad >= 0");
  }
  const int span = in + 2 * pad - kernel;
  if (span < 0) {
    throw ShapeError("convolution output extent is non-positive (in=" +
                     std::to_string(in) + ", kernel=" + std::to_string(kernel) +
                     ", pad=" + std::to_string(pad) + ")");
  }
  return span / stride + 1;
}

template <typename T>
Var<T> MatMul(const Var<T>& a, const Var<T>& b, bool transpose_b) {
  Require2d(a.shape(), "MatMul");
  Require2d(b.shape(), "MatMul");
  const int m = a.dim(0), p = a.dim(1);
  const int bp = transpose_b ? b.dim(1) : b.dim(0);
  const int n = transpose_b ? b.dim(0) : b.dim(1);
  if (p != bp) {
    throw ShapeError("MatMul inner extents differ: " + ShapeString(a.shape()) +
                     " x " + ShapeString(b.shape()) +
                     (transpose_b ? "^T" : ""));
  }
  Array<T> out({m, n});
  if (transpose_b) {
    AsMat(out).noalias() = AsMat(a.value()) * AsMat(b.value()).transpose();
  } else {
    AsMat(out).noalias() = AsMat(a.value()) * AsMat(b.value());
  }
  return MakeVar<T>(std::move(out), {a, b}, [transpose_b](Node<T>& n) {
    const Array<T>& av = n.inputs[0]->value;
    const Array<T>& bv = n.inputs[1]->value;
    auto dc = AsMat(static_cast<const Array<T>&>(n.grad));
    if (Array<T>* ga = GradOf(n, 0)) {
      if (transpose_b) {
        AsMat(*ga).noalias() += dc * AsMat(bv);
      } else {
        AsMat(*ga).noalias() += dc * AsMat(bv).transpose();
      }
    }
    if (Array<T>* gb = GradOf(n, 1)) {
      if (transpose_b) {
        AsMat(*gb).noalias() += dc.transpose() * AsMat(av);
      } else {
        AsMat(*gb).noalias() += AsMat(av).transpose() * dc;
      }
    }
  });
}

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b) {
  RequireSame(a.shape(), b.shape(), "Add");
  Array<T> out = a.value();
  AddInto(out, b.value());
  return MakeVar<T>(std::move(out), {a, b}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) AddInto(*g, n.grad);
    if (Array<T>* g = GradOf(n, 1)) AddInto(*g, n.grad);
  });
}

template <typename T>
Var<T> Sub(const Var<T>& a, const Var<T>& b) {
  RequireSame(a.shape(), b.shape(), "Sub");
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return MakeVar<T>(std::move(out), {a, b}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) AddInto(*g, n.grad);
    if (Array<T>* g = GradOf(n, 1)) {
      for (int64_t i = 0; i < g->size(); ++i) (*g)[i] -= n.grad[i];
    }
  });
}

template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b) {
  RequireSame(a.shape(), b.shape(), "Mul");
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return MakeVar<T>(std::move(out), {a, b}, [](Node<T>& n) {
    const Array<T>& av = n.inputs[0]->value;
    const Array<T>& bv = n.inputs[1]->value;
    if (Array<T>* g = GradOf(n, 0)) {
      for (int64_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * bv[i];
    }
    if (Array<T>* g = GradOf(n, 1)) {
      for (int64_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * av[i];
    }
  });
}

template <typename T>
Var<T> Scale(const Var<T>& a, T s) {
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= s;
  return MakeVar<T>(std::move(out), {a}, [s](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      for (int64_t i = 0; i < g->size(); ++i) (*g)[i] += s * n.grad[i];
    }
  });
}

template <typename T>
Var<T> AddScalar(const Var<T>& a, T s) {
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] += s;
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) AddInto(*g, n.grad);
  });
}

template <typename T>
Var<T> AddRowVector(const Var<T>& a, const Var<T>& v) {
  Require2d(a.shape(), "AddRowVector");
  const int rows = a.dim(0), cols = a.dim(1);
  if (v.size() != cols) {
    throw ShapeError("AddRowVector: vector of " + std::to_string(v.size()) +
                     " elements for " + std::to_string(cols) + " columns");
  }
  Array<T> out = a.value();
  const T* vv = v.value().data();
  for (int r = 0; r < rows; ++r) {
    T* row = out.data() + static_cast<int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += vv[c];
  }
  return MakeVar<T>(std::move(out), {a, v}, [rows, cols](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) AddInto(*g, n.grad);
    if (Array<T>* g = GradOf(n, 1)) {
      for (int r = 0; r < rows; ++r) {
        const T* row = n.grad.data() + static_cast<int64_t>(r) * cols;
        for (int c = 0; c < cols; ++c) (*g)[c] += row[c];
      }
    }
  });
}

template <typename T>
Var<T> Linear(const Var<T>& x, const Var<T>& w, const Var<T>* b) {
  Require2d(x.shape(), "Linear");
  Require2d(w.shape(), "Linear");
  if (x.dim(1) != w.dim(0)) {
    throw ShapeError("Linear: input " + ShapeString(x.shape()) +
                     " incompatible with weight " + ShapeString(w.shape()));
  }
  const int out_dim = w.dim(1);
  if (b != nullptr && b->size() != out_dim) {
    throw ShapeError("Linear: bias size mismatch");
  }
  Array<T> out({x.dim(0), out_dim});
  AsMat(out).noalias() = AsMat(x.value()) * AsMat(w.value());
  std::vector<Var<T>> inputs{x, w};
  if (b != nullptr) {
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(
        b->value().data(), out_dim);
    AsMat(out).rowwise() += bias;
    inputs.push_back(*b);
  }
  return MakeVar<T>(std::move(out), std::move(inputs), [](Node<T>& n) {
    const Array<T>& xv = n.inputs[0]->value;
    const Array<T>& wv = n.inputs[1]->value;
    auto dy = AsMat(static_cast<const Array<T>&>(n.grad));
    if (Array<T>* g = GradOf(n, 0)) {
      AsMat(*g).noalias() += dy * AsMat(wv).transpose();
    }
    if (Array<T>* g = GradOf(n, 1)) {
      AsMat(*g).noalias() += AsMat(xv).transpose() * dy;
    }
    if (n.inputs.size() > 2) {
      if (Array<T>* g = GradOf(n, 2)) {
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gb(g->data(), g->size());
        gb += dy.colwise().sum();
      }
    }
  });
}

template <typename T>
Var<T> Relu(const Var<T>& a) {
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], T(0));
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      for (int64_t i = 0; i < g->size(); ++i) {
        if (n.value[i] > T(0)) (*g)[i] += n.grad[i];
      }
    }
  });
}

template <typename T>
Var<T> Gelu(const Var<T>& a) {
  Array<T> out(a.shape());
  const T* x = a.value().data();
  for (int64_t i = 0; i < out.size(); ++i) {
    const double v = x[i];
    out[i] = static_cast<T>(0.5 * v * std::erfc(-v * M_SQRT1_2));
  }
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      const Array<T>& in = n.inputs[0]->value;
      for (int64_t i = 0; i < g->size(); ++i) {
        const double v = in[i];
        const double cdf = 0.5 * std::erfc(-v * M_SQRT1_2);
        const double pdf = std::exp(-0.5 * v * v) * 0.5 * M_2_SQRTPI * M_SQRT1_2;
        (*g)[i] += static_cast<T>(n.grad[i] * (cdf + v * pdf));
      }
    }
  });
}

template <typename T>
Var<T> Exp(const Var<T>& a) {
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      for (int64_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * n.value[i];
    }
  });
}

template <typename T>
Var<T> Square(const Var<T>& a) {
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= out[i];
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    const Array<T>& av = n.inputs[0]->value;
    if (Array<T>* g = GradOf(n, 0)) {
      for (int64_t i = 0; i < g->size(); ++i) {
        (*g)[i] += T(2) * av[i] * n.grad[i];
      }
    }
  });
}

template <typename T>
Var<T> Abs(const Var<T>& a) {
  Array<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::abs(out[i]);
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    const Array<T>& av = n.inputs[0]->value;
    if (Array<T>* g = GradOf(n, 0)) {
      for (int64_t i = 0; i < g->size(); ++i) {
        const T s = av[i] > 0 ? T(1) : (av[i] < 0 ? T(-1) : T(0));
        (*g)[i] += s * n.grad[i];
      }
    }
  });
}

namespace {

template <typename T>
void SoftmaxRowsInPlace(T* data, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    T* row = data + static_cast<int64_t>(r) * cols;
    T mx = row[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    T sum = 0;
    for (int c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    const T inv = T(1) / sum;
    for (int c = 0; c < cols; ++c) row[c] *= inv;
  }
}

// dx = y * (dy - <dy, y>) row-wise, accumulated into dx.
template <typename T>
void SoftmaxBackwardRows(const T* y, const T* dy, T* dx, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const int64_t off = static_cast<int64_t>(r) * cols;
    T dot = 0;
    for (int c = 0; c < cols; ++c) dot += dy[off + c] * y[off + c];
    for (int c = 0; c < cols; ++c) dx[off + c] += y[off + c] * (dy[off + c] - dot);
  }
}

}  // namespace

template <typename T>
Var<T> SoftmaxRows(const Var<T>& a) {
  Require2d(a.shape(), "SoftmaxRows");
  Array<T> out = a.value();
  SoftmaxRowsInPlace(out.data(), a.dim(0), a.dim(1));
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      SoftmaxBackwardRows(n.value.data(), n.grad.data(), g->data(),
                          n.value.dim(0), n.value.dim(1));
    }
  });
}

template <typename T>
Var<T> LayerNormRows(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                     T eps) {
  Require2d(x.shape(), "LayerNormRows");
  const int rows = x.dim(0), d = x.dim(1);
  if (gamma.size() != d || beta.size() != d) {
    throw ShapeError("LayerNormRows: affine parameters must have " +
                     std::to_string(d) + " elements");
  }
  Array<T> xhat({rows, d});
  std::vector<T> inv_std(rows);
  Array<T> out({rows, d});
  const T* g = gamma.value().data();
  const T* bb = beta.value().data();
  for (int r = 0; r < rows; ++r) {
    const T* xr = x.value().data() + static_cast<int64_t>(r) * d;
    T mean = 0;
    for (int c = 0; c < d; ++c) mean += xr[c];
    mean /= d;
    T var = 0;
    for (int c = 0; c < d; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= d;
    const T inv = T(1) / std::sqrt(var + eps);
    inv_std[r] = inv;
    T* hr = xhat.data() + static_cast<int64_t>(r) * d;
    T* orow = out.data() + static_cast<int64_t>(r) * d;
    for (int c = 0; c < d; ++c) {
      hr[c] = (xr[c] - mean) * inv;
      orow[c] = hr[c] * g[c] + bb[c];
    }
  }
  return MakeVar<T>(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
       d](Node<T>& n) {
        const T* g = n.inputs[1]->value.data();
        Array<T>* gx = GradOf(n, 0);
        Array<T>* gg = GradOf(n, 1);
        Array<T>* gb = GradOf(n, 2);
        std::vector<T> dxhat(d);
        for (int r = 0; r < rows; ++r) {
          const int64_t off = static_cast<int64_t>(r) * d;
          const T* dy = n.grad.data() + off;
          const T* hr = xhat.data() + off;
          if (gg) {
            for (int c = 0; c < d; ++c) (*gg)[c] += dy[c] * hr[c];
          }
          if (gb) {
            for (int c = 0; c < d; ++c) (*gb)[c] += dy[c];
          }
          if (gx) {
            T sum = 0, sum_h = 0;
            for (int c = 0; c < d; ++c) {
              dxhat[c] = dy[c] * g[c];
              sum += dxhat[c];
              sum_h += dxhat[c] * hr[c];
            }
            const T scale = inv_std[r] / d;
            T* out = gx->data() + off;
            for (int c = 0; c < d; ++c) {
              out[c] += scale * (d * dxhat[c] - sum - hr[c] * sum_h);
            }
          }
        }
      });
}

template <typename T>
Var<T> Conv2d(const Var<T>& x, const Var<T>& w, const Var<T>* b,
              const ConvSpec& spec) {
  if (x.shape().size() != 4) {
    throw ShapeError("Conv2d expects [N,H,W,C] input, got " +
                     ShapeString(x.shape()));
  }
  const int batch = x.dim(0), h = x.dim(1), wd = x.dim(2), cin = x.dim(3);
  const int k = spec.kernel, s = spec.stride, p = spec.pad;
  const int ho = ConvOutputExtent(h, k, s, p);
  const int wo = ConvOutputExtent(wd, k, s, p);
  const int patch = k * k * cin;
  Require2d(w.shape(), "Conv2d weight");
  if (w.dim(0) != patch) {
    throw ShapeError("Conv2d weight has " + std::to_string(w.dim(0)) +
                     " rows, expected K*K*Cin = " + std::to_string(patch));
  }
  const int cout = w.dim(1);
  if (b != nullptr && b->size() != cout) {
    throw ShapeError("Conv2d bias size mismatch");
  }
  const int64_t rows = static_cast<int64_t>(batch) * ho * wo;
  Array<T> col({static_cast<int>(rows), patch});
  const T* xv = x.value().data();
  T* cv = col.data();
  for (int nb = 0; nb < batch; ++nb) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        T* dst = cv + ((static_cast<int64_t>(nb) * ho + oy) * wo + ox) * patch;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * s - p + ky;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * s - p + kx;
            T* cell = dst + (ky * k + kx) * cin;
            if (iy < 0 || iy >= h || ix < 0 || ix >= wd) {
              std::fill(cell, cell + cin, T(0));
            } else {
              const T* src =
                  xv + ((static_cast<int64_t>(nb) * h + iy) * wd + ix) * cin;
              std::copy(src, src + cin, cell);
            }
          }
        }
      }
    }
  }
  Array<T> out({batch, ho, wo, cout});
  MatMap<T> om(out.data(), rows, cout);
  om.noalias() = CMatMap<T>(col.data(), rows, patch) * AsMat(w.value());
  std::vector<Var<T>> inputs{x, w};
  if (b != nullptr) {
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(
        b->value().data(), cout);
    om.rowwise() += bias;
    inputs.push_back(*b);
  }
  return MakeVar<T>(
      std::move(out), std::move(inputs),
      [col = std::move(col), batch, h, wd, cin, k, s, p, ho, wo, patch, cout,
       rows](Node<T>& n) {
        CMatMap<T> dy(n.grad.data(), rows, cout);
        const Array<T>& wv = n.inputs[1]->value;
        CMatMap<T> cm(col.data(), rows, patch);
        if (Array<T>* gw = GradOf(n, 1)) {
          AsMat(*gw).noalias() += cm.transpose() * dy;
        }
        if (n.inputs.size() > 2) {
          if (Array<T>* gb = GradOf(n, 2)) {
            Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gbm(gb->data(), cout);
            gbm += dy.colwise().sum();
          }
        }
        if (Array<T>* gx = GradOf(n, 0)) {
          RowMat<T> dcol = dy * AsMat(wv).transpose();
          T* gxv = gx->data();
          for (int nb = 0; nb < batch; ++nb) {
            for (int oy = 0; oy < ho; ++oy) {
              for (int ox = 0; ox < wo; ++ox) {
                const T* src =
                    dcol.data() +
                    ((static_cast<int64_t>(nb) * ho + oy) * wo + ox) * patch;
                for (int ky = 0; ky < k; ++ky) {
                  const int iy = oy * s - p + ky;
                  if (iy < 0 || iy >= h) continue;
                  for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * s - p + kx;
                    if (ix < 0 || ix >= wd) continue;
                    T* dst = gxv +
                             ((static_cast<int64_t>(nb) * h + iy) * wd + ix) * cin;
                    const T* cell = src + (ky * k + kx) * cin;
                    for (int c = 0; c < cin; ++c) dst[c] += cell[c];
                  }
                }
              }
            }
          }
        }
      });
}

template <typename T>
Var<T> MaxPool2d(const Var<T>& x, const ConvSpec& spec) {
  if (x.shape().size() != 4) throw ShapeError("MaxPool2d expects [N,H,W,C]");
  const int batch = x.dim(0), h = x.dim(1), wd = x.dim(2), c = x.dim(3);
  const int k = spec.kernel, s = spec.stride, p = spec.pad;
  const int ho = ConvOutputExtent(h, k, s, p);
  const int wo = ConvOutputExtent(wd, k, s, p);
  Array<T> out({batch, ho, wo, c});
  std::vector<int64_t> argmax(out.size(), -1);
  const T* xv = x.value().data();
  for (int nb = 0; nb < batch; ++nb) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        for (int ch = 0; ch < c; ++ch) {
          T best = -std::numeric_limits<T>::infinity();
          int64_t best_i = -1;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s - p + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s - p + kx;
              if (ix < 0 || ix >= wd) continue;
              const int64_t i =
                  ((static_cast<int64_t>(nb) * h + iy) * wd + ix) * c + ch;
              if (best_i < 0 || xv[i] > best) {
                best = xv[i];
                best_i = i;
              }
            }
          }
          const int64_t o = ((static_cast<int64_t>(nb) * ho + oy) * wo + ox) * c + ch;
          out[o] = best_i < 0 ? T(0) : best;
          argmax[o] = best_i;
        }
      }
    }
  }
  return MakeVar<T>(std::move(out), {x}, [argmax = std::move(argmax)](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      for (size_t o = 0; o < argmax.size(); ++o) {
        if (argmax[o] >= 0) (*g)[argmax[o]] += n.grad[o];
      }
    }
  });
}

template <typename T>
Var<T> Reshape(const Var<T>& a, Shape shape) {
  Array<T> out = a.value().Reshaped(std::move(shape));
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) AddInto(*g, n.grad);
  });
}

template <typename T>
Var<T> Transpose(const Var<T>& a) {
  Require2d(a.shape(), "Transpose");
  Array<T> out({a.dim(1), a.dim(0)});
  AsMat(out) = AsMat(a.value()).transpose();
  return MakeVar<T>(std::move(out), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      AsMat(*g) += AsMat(static_cast<const Array<T>&>(n.grad)).transpose();
    }
  });
}

template <typename T>
Var<T> ConcatRows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("ConcatRows of nothing");
  const int cols = parts[0].dim(1);
  int rows = 0;
  std::vector<int> offsets;
  for (const Var<T>& v : parts) {
    Require2d(v.shape(), "ConcatRows");
    if (v.dim(1) != cols) throw ShapeError("ConcatRows column mismatch");
    offsets.push_back(rows);
    rows += v.dim(0);
  }
  Array<T> out({rows, cols});
  for (size_t i = 0; i < parts.size(); ++i) {
    std::copy(parts[i].value().data(),
              parts[i].value().data() + parts[i].size(),
              out.data() + static_cast<int64_t>(offsets[i]) * cols);
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return MakeVar<T>(std::move(out), std::move(inputs),
                    [offsets = std::move(offsets), cols](Node<T>& n) {
                      for (size_t i = 0; i < n.inputs.size(); ++i) {
                        if (Array<T>* g = GradOf(n, i)) {
                          const T* src = n.grad.data() +
                                         static_cast<int64_t>(offsets[i]) * cols;
                          for (int64_t j = 0; j < g->size(); ++j) (*g)[j] += src[j];
                        }
                      }
                    });
}

template <typename T>
Var<T> SliceRows(const Var<T>& a, int begin, int end) {
  Require2d(a.shape(), "SliceRows");
  if (begin < 0 || end > a.dim(0) || begin > end) {
    throw ShapeError("SliceRows range out of bounds");
  }
  const int cols = a.dim(1);
  Array<T> out({end - begin, cols});
  std::copy(a.value().data() + static_cast<int64_t>(begin) * cols,
            a.value().data() + static_cast<int64_t>(end) * cols, out.data());
  return MakeVar<T>(std::move(out), {a}, [begin, cols](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      T* dst = g->data() + static_cast<int64_t>(begin) * cols;
      for (int64_t j = 0; j < n.grad.size(); ++j) dst[j] += n.grad[j];
    }
  });
}

template <typename T>
Var<T> SliceCols(const Var<T>& a, int begin, int end) {
  Require2d(a.shape(), "SliceCols");
  if (begin < 0 || end > a.dim(1) || begin > end) {
    throw ShapeError("SliceCols range out of bounds");
  }
  const int rows = a.dim(0), cols = a.dim(1), w = end - begin;
  Array<T> out({rows, w});
  for (int r = 0; r < rows; ++r) {
    std::copy(a.value().data() + static_cast<int64_t>(r) * cols + begin,
              a.value().data() + static_cast<int64_t>(r) * cols + end,
              out.data() + static_cast<int64_t>(r) * w);
  }
  return MakeVar<T>(std::move(out), {a}, [rows, cols, begin, w](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      for (int r = 0; r < rows; ++r) {
        T* dst = g->data() + static_cast<int64_t>(r) * cols + begin;
        const T* src = n.grad.data() + static_cast<int64_t>(r) * w;
        for (int c = 0; c < w; ++c) dst[c] += src[c];
      }
    }
  });
}

template <typename T>
Var<T> GatherRows(const Var<T>& a, std::span<const int> index) {
  Require2d(a.shape(), "GatherRows");
  const int rows = a.dim(0), cols = a.dim(1);
  Array<T> out({static_cast<int>(index.size()), cols});
  for (size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= rows) {
      throw ShapeError("GatherRows index " + std::to_string(index[i]) +
                       " out of range for " + std::to_string(rows) + " rows");
    }
    std::copy(a.value().data() + static_cast<int64_t>(index[i]) * cols,
              a.value().data() + static_cast<int64_t>(index[i] + 1) * cols,
              out.data() + static_cast<int64_t>(i) * cols);
  }
  std::vector<int> idx(index.begin(), index.end());
  return MakeVar<T>(std::move(out), {a}, [idx = std::move(idx), cols](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      for (size_t i = 0; i < idx.size(); ++i) {
        T* dst = g->data() + static_cast<int64_t>(idx[i]) * cols;
        const T* src = n.grad.data() + static_cast<int64_t>(i) * cols;
        for (int c = 0; c < cols; ++c) dst[c] += src[c];
      }
    }
  });
}

template <typename T>
Var<T> Attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, int heads,
                 int groups) {
  Require2d(q.shape(), "Attention");
  Require2d(k.shape(), "Attention");
  Require2d(v.shape(), "Attention");
  const int d = q.dim(1);
  if (k.dim(1) != d || v.dim(1) != d) {
    throw ShapeError("Attention: q, k, v must share the feature width");
  }
  if (heads < 1 || d % heads != 0) {
    throw ShapeError("Attention: width " + std::to_string(d) +
                     " not divisible by " + std::to_string(heads) + " heads");
  }
  if (k.dim(0) != v.dim(0)) throw ShapeError("Attention: k/v row mismatch");
  if (groups < 1 || q.dim(0) % groups != 0 || k.dim(0) % groups != 0) {
    throw ShapeError("Attention: rows not divisible into groups");
  }
  const int nq = q.dim(0) / groups, nk = k.dim(0) / groups, dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Array<T> probs({groups * heads * nq, nk});
  Array<T> out({q.dim(0), d});
  for (int g = 0; g < groups; ++g) {
    for (int h = 0; h < heads; ++h) {
      const int64_t qoff = static_cast<int64_t>(g) * nq * d + h * dh;
      const int64_t koff = static_cast<int64_t>(g) * nk * d + h * dh;
      CStridedMap<T> qm(q.value().data() + qoff, nq, dh, Eigen::OuterStride<>(d));
      CStridedMap<T> km(k.value().data() + koff, nk, dh, Eigen::OuterStride<>(d));
      CStridedMap<T> vm(v.value().data() + koff, nk, dh, Eigen::OuterStride<>(d));
      T* pp = probs.data() + (static_cast<int64_t>(g) * heads + h) * nq * nk;
      MatMap<T> pm(pp, nq, nk);
      pm.noalias() = (qm * km.transpose()) * scale;
      SoftmaxRowsInPlace(pp, nq, nk);
      StridedMap<T> om(out.data() + qoff, nq, dh, Eigen::OuterStride<>(d));
      om.noalias() = pm * vm;
    }
  }
  return MakeVar<T>(
      std::move(out), {q, k, v},
      [probs = std::move(probs), groups, heads, nq, nk, d, dh, scale](Node<T>& n) {
        const Array<T>& qv = n.inputs[0]->value;
        const Array<T>& kv = n.inputs[1]->value;
        const Array<T>& vv = n.inputs[2]->value;
        Array<T>* gq = GradOf(n, 0);
        Array<T>* gk = GradOf(n, 1);
        Array<T>* gv = GradOf(n, 2);
        RowMat<T> dp(nq, nk), ds(nq, nk);
        for (int g = 0; g < groups; ++g) {
          for (int h = 0; h < heads; ++h) {
            const int64_t qoff = static_cast<int64_t>(g) * nq * d + h * dh;
            const int64_t koff = static_cast<int64_t>(g) * nk * d + h * dh;
            const T* pp = probs.data() + (static_cast<int64_t>(g) * heads + h) * nq * nk;
            CMatMap<T> pm(pp, nq, nk);
            CStridedMap<T> dom(n.grad.data() + qoff, nq, dh, Eigen::OuterStride<>(d));
            CStridedMap<T> vm(vv.data() + koff, nk, dh, Eigen::OuterStride<>(d));
            if (gv) {
              StridedMap<T> gvm(gv->data() + koff, nk, dh, Eigen::OuterStride<>(d));
              gvm.noalias() += pm.transpose() * dom;
            }
            if (!gq && !gk) continue;
            dp.noalias() = dom * vm.transpose();
            ds.setZero();
            SoftmaxBackwardRows(pp, dp.data(), ds.data(), nq, nk);
            ds *= scale;
            if (gq) {
              CStridedMap<T> km(kv.data() + koff, nk, dh, Eigen::OuterStride<>(d));
              StridedMap<T> gqm(gq->data() + qoff, nq, dh, Eigen::OuterStride<>(d));
              gqm.noalias() += ds * km;
            }
            if (gk) {
              CStridedMap<T> qm(qv.data() + qoff, nq, dh, Eigen::OuterStride<>(d));
              StridedMap<T> gkm(gk->data() + koff, nk, dh, Eigen::OuterStride<>(d));
              gkm.noalias() += ds.transpose() * qm;
            }
          }
        }
      });
}

template <typename T>
Var<T> Sum(const Var<T>& a) {
  T s = 0;
  for (int64_t i = 0; i < a.size(); ++i) s += a.value()[i];
  return MakeVar<T>(Array<T>({1}, {s}), {a}, [](Node<T>& n) {
    if (Array<T>* g = GradOf(n, 0)) {
      const T gs = n.grad[0];
      for (int64_t i = 0; i < g->size(); ++i) (*g)[i] += gs;
    }
  });
}

template <typename T>
Var<T> Mean(const Var<T>& a) {
  if (a.size() == 0) throw ShapeError("Mean of empty array");
  return Scale(Sum(a), T(1) / static_cast<T>(a.size()));
}

template <typename T>
Var<T> MaskedL1(const Var<T>& pred, const Array<T>& target,
                std::span<const uint8_t> mask) {
  Require2d(pred.shape(), "MaskedL1");
  RequireSame(pred.shape(), target.shape(), "MaskedL1");
  const int rows = pred.dim(0), cols = pred.dim(1);
  if (static_cast<int>(mask.size()) != rows) {
    throw ShapeError("MaskedL1: mask length differs from row count");
  }
  int valid = 0;
  for (uint8_t m : mask) valid += m ? 1 : 0;
  if (valid == 0) throw InvariantError("MaskedL1: mask selects no rows");
  const T denom = static_cast<T>(cols) * static_cast<T>(valid);
  T s = 0;
  for (int r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    for (int c = 0; c < cols; ++c) {
      s += std::abs(pred.value().at(r, c) - target.at(r, c));
    }
  }
  std::vector<uint8_t> m(mask.begin(), mask.end());
  return MakeVar<T>(
      Array<T>({1}, {s / denom}), {pred},
      [target, m = std::move(m), rows, cols, denom](Node<T>& n) {
        if (Array<T>* g = GradOf(n, 0)) {
          const Array<T>& pv = n.inputs[0]->value;
          const T gs = n.grad[0] / denom;
          for (int r = 0; r < rows; ++r) {
            if (!m[r]) continue;
            for (int c = 0; c < cols; ++c) {
              const T diff = pv.at(r, c) - target.at(r, c);
              const T sgn = diff > 0 ? T(1) : (diff < 0 ? T(-1) : T(0));
              g->at(r, c) += gs * sgn;
            }
          }
        }
      });
}

template <typename T>
Var<T> GaussianKl(const Var<T>& mu, const Var<T>& logvar) {
  if (mu.size() != logvar.size()) {
    throw ShapeError("GaussianKl: mu and logvar sizes differ");
  }
  T s = 0;
  for (int64_t i = 0; i < mu.size(); ++i) {
    const T m = mu.value()[i], lv = logvar.value()[i];
    s += m * m + std::exp(lv) - T(1) - lv;
  }
  return MakeVar<T>(Array<T>({1}, {T(0.5) * s}), {mu, logvar}, [](Node<T>& n) {
    const T gs = n.grad[0];
    if (Array<T>* g = GradOf(n, 0)) {
      const Array<T>& mv = n.inputs[0]->value;
      for (int64_t i = 0; i < g->size(); ++i) (*g)[i] += gs * mv[i];
    }
    if (Array<T>* g = GradOf(n, 1)) {
      const Array<T>& lv = n.inputs[1]->value;
      for (int64_t i = 0; i < g->size(); ++i) {
        (*g)[i] += gs * T(0.5) * (std::exp(lv[i]) - T(1));
      }
    }
  });
}

#define IFCGRASP_INSTANTIATE_OPS(T)                                            \
  template Var<T> MatMul(const Var<T>&, const Var<T>&, bool);                  \
  template Var<T> Add(const Var<T>&, const Var<T>&);                           \
  template Var<T> Sub(const Var<T>&, const Var<T>&);                           \
  template Var<T> Mul(const Var<T>&, const Var<T>&);                           \
  template Var<T> Scale(const Var<T>&, T);                                     \
  template Var<T> AddScalar(const Var<T>&, T);                                 \
  template Var<T> AddRowVector(const Var<T>&, const Var<T>&);                  \
  template Var<T> Linear(const Var<T>&, const Var<T>&, const Var<T>*);         \
  template Var<T> Relu(const Var<T>&);                                         \
  template Var<T> Gelu(const Var<T>&);                                         \
  template Var<T> Exp(const Var<T>&);                                          \
  template Var<T> Square(const Var<T>&);                                       \
  template Var<T> Abs(const Var<T>&);                                          \
  template Var<T> SoftmaxRows(const Var<T>&);                                  \
  template Var<T> LayerNormRows(const Var<T>&, const Var<T>&, const Var<T>&, T); \
  template Var<T> Conv2d(const Var<T>&, const Var<T>&, const Var<T>*,          \
                         const ConvSpec&);                                     \
  template Var<T> MaxPool2d(const Var<T>&, const ConvSpec&);                   \
  template Var<T> Reshape(const Var<T>&, Shape);                               \
  template Var<T> Transpose(const Var<T>&);                                    \
  template Var<T> ConcatRows(std::span<const Var<T>>);                         \
  template Var<T> SliceRows(const Var<T>&, int, int);                          \
  template Var<T> SliceCols(const Var<T>&, int, int);                          \
  template Var<T> GatherRows(const Var<T>&, std::span<const int>);             \
  template Var<T> Attention(const Var<T>&, const Var<T>&, const Var<T>&, int,  \
                            int);                                              \
  template Var<T> Sum(const Var<T>&);                                          \
  template Var<T> Mean(const Var<T>&);                                         \
  template Var<T> MaskedL1(const Var<T>&, const Array<T>&,                     \
                           std::span<const uint8_t>);                          \
  template Var<T> GaussianKl(const Var<T>&, const Var<T>&);

IFCGRASP_INSTANTIATE_OPS(float)
IFCGRASP_INSTANTIATE_OPS(double)

#undef IFCGRASP_INSTANTIATE_OPS

}  // namespace ifcgrasp::num
