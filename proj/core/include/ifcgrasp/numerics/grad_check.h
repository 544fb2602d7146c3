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

#ifndef IFCGRASP_NUMERICS_GRAD_CHECK_H_
#define IFCGRASP_NUMERICS_GRAD_CHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "ifcgrasp/numerics/autodiff.h"
#include "ifcgrasp/numerics/rng.h"

namespace ifcgrasp::num {

struct GradCheckOptions {
  double epsilon = 1e-4;
  // Coordinates checked; 0 or more than available checks all of them.
  int max_coordinates = 200;
  // Differences below this magnitude are treated as round-off.
  double absolute_floor = 1e-8;
  uint64_t seed = 1;
};

struct GradCheckCoordinate {
  std::string parameter;
  int64_t index = 0;
  double analytic = 0;
  double numeric = 0;
  double relative_error = 0;
};

struct GradCheckResult {
  double max_relative_error = 0;
  std::vector<GradCheckCoordinate> coordinates;
};

// Compares reverse-mode gradients of `f` against central differences
// (f(theta + eps) - f(theta - eps)) / (2 eps) on a random subset of parameter
// coordinates. `f` must rebuild its graph from the current parameter values on
// every call. Relative error is |a - n| / max(|a| + |n|, absolute_floor).
GradCheckResult GradCheck(const std::function<Var<double>()>& f,
                          const std::vector<Parameter<double>*>& params,
                          const GradCheckOptions& options = {});

}  // namespace ifcgrasp::num

#endif  // IFCGRASP_NUMERICS_GRAD_CHECK_H_
