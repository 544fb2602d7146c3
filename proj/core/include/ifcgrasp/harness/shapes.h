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

#ifndef IFCGRASP_HARNESS_SHAPES_H_
#define IFCGRASP_HARNESS_SHAPES_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifcgrasp/numerics/array.h"
#include "ifcgrasp/policy/config.h"

namespace ifcgrasp::harness {

// Extents measured from one forward pass with random weights and frames.
struct ShapeReport {
  std::string preset;
  num::Shape features;      // [2, H, W, D]
  num::Shape cost_volume;   // [H, W, H, W]
  std::vector<std::pair<int, int>> cnn_chain;
  int64_t motion_tokens = 0;
  int64_t motion_dim = 0;
  int64_t visual_tokens = 0;
  int64_t observation_tokens = 0;
  int64_t observation_dim = 0;
  num::Shape action_chunk;  // [k, D_a]
  double seconds = 0;

  nlohmann::json ToJson() const;
};

ShapeReport MeasureShapes(const policy::PolicyConfig& config, uint64_t seed = 1);

// Empty when every measured extent matches; otherwise one line per mismatch.
// The paper preset is also held to its fixed reference extents.
std::vector<std::string> ShapeMismatches(const ShapeReport& report,
                                         const policy::PolicyConfig& config);

}  // namespace ifcgrasp::harness

#endif  // IFCGRASP_HARNESS_SHAPES_H_
