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

#ifndef IFCGRASP_SIM_RENDER_H_
#define IFCGRASP_SIM_RENDER_H_

#include <string>
#include <vector>

#include "ifcgrasp/numerics/array.h"
#include "ifcgrasp/sim/scenario.h"
#include "ifcgrasp/sim/types.h"

namespace ifcgrasp::sim {

// Orthographic camera over the workspace plane. Image columns run along the
// camera's u axis, rows along -v.
struct CameraSpec {
  std::string id;
  int height = 64;
  int width = 80;
  Vec2 center = Vec2::Zero();  // world frame, or end-effector frame if attached
  double rotation = 0;         // u axis angle
  double view_width = 1.0;     // meters spanned by the image width
  bool attached = false;       // hand-eye: pose follows the end effector

  void Validate(int downsample) const;
};

// global_1, global_2, hand_eye at the given extents.
std::vector<CameraSpec> DefaultCameras(int height, int width);

// Float image [H, W, 3] in [0, 1]. Deterministic in (state, scenario seed,
// step, camera index).
num::Array<float> Render(const SimParams& params, const WorldState& w,
                         const CameraSpec& cam, int camera_index,
                         const EpisodeScenario& scenario);

// All cameras stacked: [C, H, W, 3].
num::Array<float> RenderAll(const SimParams& params, const WorldState& w,
                            const std::vector<CameraSpec>& cams,
                            const EpisodeScenario& scenario);

// Binary PPM (P6) dump for debugging. Throws IoError.
void WritePpm(const std::string& path, const num::Array<float>& image);

}  // namespace ifcgrasp::sim

#endif  // IFCGRASP_SIM_RENDER_H_
