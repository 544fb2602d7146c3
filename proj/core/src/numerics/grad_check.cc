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

#include "ifcgrasp/numerics/grad_check.h"

#include <algorithm>
#include <cmath>
#include <utility>

namespace ifcgrasp::num {
namespace {

double Evaluate(const std::function<Var<double>()>& f) {
  NoGradGuard guard;
  Var<double> y = f();
  if (y.size() != 1) throw ShapeError("GradCheck: f must return a scalar");
  const double v = y.value()[0];
  if (!std::isfinite(v)) throw NumericError("GradCheck: f is not finite");
  return v;
}

}  // namespace

GradCheckResult GradCheck(const std::function<Var<double>()>& f,
                          const std::vector<Parameter<double>*>& params,
                          const GradCheckOptions& options) {
  for (Parameter<double>* p : params) p->grad.Fill(0.0);
  {
    Var<double> y = f();
    if (y.size() != 1) throw ShapeError("GradCheck: f must return a scalar");
    if (!std::isfinite(y.value()[0])) {
      throw NumericError("GradCheck: f is not finite");
    }
    Backward(y);
  }

  std::vector<std::pair<size_t, int64_t>> all;
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->trainable) continue;
    for (int64_t j = 0; j < params[i]->value.size(); ++j) all.emplace_back(i, j);
  }
  std::vector<std::pair<size_t, int64_t>> chosen;
  const int64_t want = options.max_coordinates;
  if (want <= 0 || want >= static_cast<int64_t>(all.size())) {
    chosen = all;
  } else {
    // Partial Fisher-Yates with the counter RNG.
    CounterRng rng(options.seed, 0x67c);
    for (int64_t i = 0; i < want; ++i) {
      const int64_t j = rng.UniformInt(i, static_cast<int64_t>(all.size()) - 1);
      std::swap(all[i], all[j]);
    }
    chosen.assign(all.begin(), all.begin() + want);
  }

  GradCheckResult result;
  const double eps = options.epsilon;
  for (const auto& [pi, j] : chosen) {
    Parameter<double>& p = *params[pi];
    const double saved = p.value[j];
    p.value[j] = saved + eps;
    const double up = Evaluate(f);
    p.value[j] = saved - eps;
    const double down = Evaluate(f);
    p.value[j] = saved;
    GradCheckCoordinate c;
    c.parameter = p.name;
    c.index = j;
    c.analytic = p.grad[j];
    c.numeric = (up - down) / (2.0 * eps);
    c.relative_error = std::abs(c.analytic - c.numeric) /
                       std::max(std::abs(c.analytic) + std::abs(c.numeric),
                                options.absolute_floor);
    result.max_relative_error = std::max(result.max_relative_error,
                                         c.relative_error);
    result.coordinates.push_back(std::move(c));
  }
  return result;
}

}  // namespace ifcgrasp::num
