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

#ifndef IFCGRASP_NUMERICS_OPTIM_H_
#define IFCGRASP_NUMERICS_OPTIM_H_

#include <cstdint>
#include <vector>

#include "ifcgrasp/numerics/autodiff.h"

namespace ifcgrasp::num {

struct AdamWOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

// Adam with decoupled weight decay:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
// with bias-corrected m_hat, v_hat.
template <typename T>
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  // Applies one update to every trainable parameter using its current grad.
  // Throws NumericError on a non-finite gradient; parameters are untouched
  // in that case.
  void Step(const std::vector<Parameter<T>*>& params);

  int64_t step_count() const { return step_; }
  const AdamWOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

  const std::vector<Array<T>>& first_moments() const { return m_; }
  const std::vector<Array<T>>& second_moments() const { return v_; }

 private:
  AdamWOptions options_;
  int64_t step_ = 0;
  std::vector<Array<T>> m_;
  std::vector<Array<T>> v_;
};

}  // namespace ifcgrasp::num

#endif  // IFCGRASP_NUMERICS_OPTIM_H_
