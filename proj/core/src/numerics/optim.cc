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

#include "ifcgrasp/numerics/optim.h"

#include <cmath>

namespace ifcgrasp::num {

template <typename T>
void AdamW<T>::Step(const std::vector<Parameter<T>*>& params) {
  for (const Parameter<T>* p : params) {
    if (p->grad.shape() != p->value.shape()) {
      throw ShapeError("gradient shape differs from parameter " + p->name);
    }
    if (!p->grad.AllFinite()) {
      throw NumericError("non-finite gradient for parameter " + p->name);
    }
  }
  if (m_.empty()) {
    for (const Parameter<T>* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  } else if (m_.size() != params.size()) {
    throw ShapeError("optimizer state was built for a different parameter set");
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate, wd = options_.weight_decay;
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    if (!p.trainable) continue;
    T* theta = p.value.data();
    const T* g = p.grad.data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    for (int64_t j = 0; j < p.value.size(); ++j) {
      const double gj = g[j];
      const double mj = b1 * m[j] + (1.0 - b1) * gj;
      const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double denom = std::sqrt(vj / c2) + options_.epsilon;
      // With eps = 0 and a zero gradient history the adaptive term is 0/0;
      // treat it as no movement.
      const double adaptive = denom > 0.0 ? (mj / c1) / denom : 0.0;
      theta[j] = static_cast<T>(theta[j] - lr * (adaptive + wd * theta[j]));
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace ifcgrasp::num
