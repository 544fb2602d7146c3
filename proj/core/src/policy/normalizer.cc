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

#include "ifcgrasp/policy/normalizer.h"

#include <algorithm>
#include <cmath>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::policy {

Normalizer Normalizer::Fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvariantError("cannot fit a normalizer on no data");
  const size_t d = rows.front().size();
  Normalizer n;
  n.mean.assign(d, 0.0);
  n.std.assign(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw ShapeError("normalizer rows differ in dimension");
    for (size_t i = 0; i < d; ++i) n.mean[i] += r[i];
  }
  for (double& m : n.mean) m /= rows.size();
  for (const auto& r : rows) {
    for (size_t i = 0; i < d; ++i) n.std[i] += (r[i] - n.mean[i]) * (r[i] - n.mean[i]);
  }
  for (double& s : n.std) s = std::max(std::sqrt(s / rows.size()), kMinStd);
  return n;
}

std::vector<double> Normalizer::Normalize(const std::vector<double>& x) const {
  if (x.size() != dim()) throw ShapeError("normalize: dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std[i];
  return out;
}

std::vector<double> Normalizer::Denormalize(const std::vector<double>& x) const {
  if (x.size() != dim()) throw ShapeError("denormalize: dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * std[i] + mean[i];
  return out;
}

}  // namespace ifcgrasp::policy
