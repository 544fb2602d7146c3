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

#include "ifcgrasp/sim/render.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "ifcgrasp/errors.h"
#include "ifcgrasp/numerics/rng.h"
#include "ifcgrasp/sim/kinematics.h"

namespace ifcgrasp::sim {
namespace {

using Color = std::array<float, 3>;

constexpr Color kBackground{0.15f, 0.15f, 0.18f};
constexpr Color kLink{0.55f, 0.6f, 0.7f};
constexpr Color kJaw{0.2f, 0.75f, 0.4f};
constexpr Color kTarget{0.95f, 0.55f, 0.15f};
constexpr Color kMarker{0.25f, 0.1f, 0.05f};
constexpr Color kStrip{0.4f, 0.4f, 0.42f};

struct Box {
  Vec2 center;
  double angle;
  Vec2 half;
  Color color;
};

// Signed distance to an oriented rectangle.
double BoxDistance(const Box& b, const Vec2& p) {
  const double c = std::cos(b.angle), s = std::sin(b.angle);
  const Vec2 d = p - b.center;
  const Vec2 local(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
  const Vec2 q = local.cwiseAbs() - b.half;
  return q.cwiseMax(0.0).norm() + std::min(std::max(q.x(), q.y()), 0.0);
}

Box Segment(const Vec2& a, const Vec2& b, double thickness, Color color) {
  const Vec2 d = b - a;
  return {0.5 * (a + b), std::atan2(d.y(), d.x()),
          Vec2(0.5 * d.norm() + 0.5 * thickness, 0.5 * thickness), color};
}

std::vector<Box> Scene(const SimParams& params, const WorldState& w,
                       const EpisodeScenario& scenario, bool global) {
  std::vector<Box> boxes;
  const auto joints = JointPositions(params.arm, w.arm.joints);
  for (int i = 0; i < kNumJoints; ++i) {
    boxes.push_back(Segment(joints[i], joints[i + 1], 0.03, kLink));
  }
  const double heading = EndEffectorHeading(w.arm.joints);
  const Vec2 fwd(std::cos(heading), std::sin(heading));
  const Vec2 side(-fwd.y(), fwd.x());
  const Vec2 ee = joints[kNumJoints];
  const double spread = 0.006 + 0.03 * w.arm.gripper;
  for (double sign : {-1.0, 1.0}) {
    boxes.push_back(
        {ee + 0.015 * fwd + sign * spread * side, heading, Vec2(0.02, 0.005), kJaw});
  }

  const TargetState& t = w.target;
  const double h = 0.5 * t.size;
  boxes.push_back({t.position, t.angle, Vec2(h, h), kTarget});
  const Vec2 axis(std::cos(t.angle), std::sin(t.angle));
  boxes.push_back(
      {t.position + 0.55 * h * axis, t.angle, Vec2(0.3 * h, 0.3 * h), kMarker});

  if (global && scenario.strip.size() == 4) {
    const auto& s = scenario.strip;
    const Vec2 along = s[1] - s[0];
    const Vec2 across = s[3] - s[0];
    boxes.push_back({0.25 * (s[0] + s[1] + s[2] + s[3]),
                     std::atan2(along.y(), along.x()),
                     Vec2(0.5 * along.norm(), 0.5 * across.norm()), kStrip});
  }
  return boxes;
}

}  // namespace

void CameraSpec::Validate(int downsample) const {
  if (height <= 0 || width <= 0 || !(view_width > 0)) {
    throw ConfigError("camera " + id + ": extents and view width must be positive");
  }
  if (downsample > 0 && (height % downsample != 0 || width % downsample != 0)) {
    throw ConfigError("camera " + id + ": extents not divisible by backbone downsample");
  }
}

std::vector<CameraSpec> DefaultCameras(int height, int width) {
  CameraSpec g1{"global_1", height, width, Vec2(0.3, 0.0), 0.0, 1.0, false};
  CameraSpec g2{"global_2", height, width, Vec2(0.35, 0.05), 0.5, 0.6, false};
  CameraSpec hand{"hand_eye", height, width, Vec2(0.08, 0.0), 0.0, 0.3, true};
  return {g1, g2, hand};
}

num::Array<float> Render(const SimParams& params, const WorldState& w,
                         const CameraSpec& cam, int camera_index,
                         const EpisodeScenario& scenario) {
  cam.Validate(0);
  Vec2 center = cam.center;
  double rotation = cam.rotation;
  if (cam.attached) {
    const double heading = EndEffectorHeading(w.arm.joints);
    const Vec2 ee = EndEffector(params.arm, w.arm.joints);
    center = ee + Vec2(std::cos(heading) * cam.center.x() - std::sin(heading) * cam.center.y(),
                         std::sin(heading) * cam.center.x() + std::cos(heading) * cam.center.y());
    rotation += heading;
  }
  const std::vector<Box> boxes = Scene(params, w, scenario, !cam.attached);
  const double px = cam.view_width / cam.width;
  const Vec2 u(std::cos(rotation), std::sin(rotation));
  const Vec2 v(-u.y(), u.x());

  num::Array<float> img({cam.height, cam.width, 3});
  float* out = img.data();
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const Vec2 p = center + ((c + 0.5) - 0.5 * cam.width) * px * u +
                     (0.5 * cam.height - (r + 0.5)) * px * v;
      Color col = kBackground;
      for (const Box& b : boxes) {
        const double a = std::clamp(0.5 - BoxDistance(b, p) / px, 0.0, 1.0);
        if (a == 0.0) continue;
        for (int k = 0; k < 3; ++k) {
          col[k] = static_cast<float>((1.0 - a) * col[k] + a * b.color[k]);
        }
      }
      std::copy(col.begin(), col.end(), out + (static_cast<int64_t>(r) * cam.width + c) * 3);
    }
  }

  const ScenarioConfig& sc = scenario.config;
  if (sc.kind == ScenarioKind::kCameraOcclusion &&
      camera_index == scenario.occluded_camera &&
      w.step >= scenario.occlusion_begin && w.step < scenario.occlusion_end) {
    const auto& o = scenario.occluder;
    const int r0 = static_cast<int>(std::lround(o[0] * cam.height));
    const int c0 = static_cast<int>(std::lround(o[1] * cam.width));
    const int r1 = static_cast<int>(std::lround(o[2] * cam.height));
    const int c1 = static_cast<int>(std::lround(o[3] * cam.width));
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) {
        float* px3 = out + (static_cast<int64_t>(r) * cam.width + c) * 3;
        px3[0] = px3[1] = px3[2] = 0.0f;
      }
    }
  }
  if (sc.kind == ScenarioKind::kLowLight) {
    num::CounterRng rng(scenario.seed,
                        0x10000 + static_cast<uint64_t>(w.step) * 8 + camera_index);
    for (int64_t i = 0; i < img.size(); ++i) {
      const double x = scenario.gamma * out[i] + sc.noise_std * rng.Normal();
      out[i] = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }
  }
  if (sc.kind == ScenarioKind::kGrayscale) {
    for (int64_t i = 0; i < img.size(); i += 3) {
      const float y = 0.299f * out[i] + 0.587f * out[i + 1] + 0.114f * out[i + 2];
      out[i] = out[i + 1] = out[i + 2] = std::clamp(y, 0.0f, 1.0f);
    }
  }
  return img;
}

num::Array<float> RenderAll(const SimParams& params, const WorldState& w,
                            const std::vector<CameraSpec>& cams,
                            const EpisodeScenario& scenario) {
  if (cams.empty()) throw ConfigError("no cameras");
  const int h = cams[0].height, wd = cams[0].width;
  num::Array<float> all({static_cast<int>(cams.size()), h, wd, 3});
  const int64_t per = static_cast<int64_t>(h) * wd * 3;
  for (size_t i = 0; i < cams.size(); ++i) {
    if (cams[i].height != h || cams[i].width != wd) {
      throw ConfigError("cameras must share image extents");
    }
    const num::Array<float> img = Render(params, w, cams[i], static_cast<int>(i), scenario);
    std::copy(img.data(), img.data() + per, all.data() + i * per);
  }
  return all;
}

void WritePpm(const std::string& path, const num::Array<float>& image) {
  if (image.shape().size() != 3 || image.shape()[2] != 3) {
    throw ShapeError("WritePpm expects [H, W, 3]");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  f << "P6\n" << image.shape()[1] << " " << image.shape()[0] << "\n255\n";
  for (int64_t i = 0; i < image.size(); ++i) {
    const float x = std::clamp(image[i], 0.0f, 1.0f);
    f.put(static_cast<char>(std::lround(x * 255.0f)));
  }
  if (!f) throw IoError("write failed for " + path);
}

}  // namespace ifcgrasp::sim
