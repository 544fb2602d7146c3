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

#ifndef IFCGRASP_POLICY_NORMALIZER_H_
#define IFCGRASP_POLICY_NORMALIZER_H_

#include <vector>

namespace ifcgrasp::policy {

// Per-dimension z-score with a floor on the standard deviation.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> std;

  static constexpr double kMinStd = 1e-2;

  // rows: samples of equal dimension.
  static Normalizer Fit(const std::vector<std::vector<double>>& rows);

  std::vector<double> Normalize(const std::vector<double>& x) const;
  std::vector<double> Denormalize(const std::vector<double>& x) const;
  size_t dim() const { return mean.size(); }
};

}  // namespace ifcgrasp::policy

#endif  // IFCGRASP_POLICY_NORMALIZER_H_
