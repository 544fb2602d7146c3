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

#include "ifcgrasp/harness/serialize.h"

#include <string>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::harness {

using nlohmann::json;

namespace {

std::string ActivationName(num::Activation a) {
  switch (a) {
    case num::Activation::kNone:
      return "none";
    case num::Activation::kRelu:
      return "relu";
    case num::Activation::kGelu:
      return "gelu";
  }
  return "none";
}

num::Activation ParseActivation(const std::string& s) {
  if (s == "none") return num::Activation::kNone;
  if (s == "relu") return num::Activation::kRelu;
  if (s == "gelu") return num::Activation::kGelu;
  throw ConfigError("unknown activation '" + s + "'");
}

json BackboneJson(const corr::BackboneConfig& b) {
  return {{"kind", b.kind == corr::BackboneKind::kResNet18 ? "resnet18" : "strided_conv"},
          {"downsample", b.downsample},
          {"depth", b.depth},
          {"widths", b.widths},
          {"in_channels", b.in_channels},
          {"bias", b.bias},
          {"activation", ActivationName(b.activation)}};
}

template <typename T>
void Take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void CheckKeys(const json& j, std::initializer_list<const char*> allowed,
               const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

void ApplyBackbone(const json& j, corr::BackboneConfig& b, const std::string& where) {
  CheckKeys(j, {"kind", "downsample", "depth", "widths", "in_channels", "bias", "activation"},
            where);
  if (j.contains("kind")) {
    const std::string k = j.at("kind").get<std::string>();
    if (k == "resnet18") {
      b.kind = corr::BackboneKind::kResNet18;
    } else if (k == "strided_conv") {
      b.kind = corr::BackboneKind::kStridedConv;
    } else {
      throw ConfigError("unknown backbone kind '" + k + "'");
    }
  }
  Take(j, "downsample", b.downsample);
  Take(j, "depth", b.depth);
  Take(j, "widths", b.widths);
  Take(j, "in_channels", b.in_channels);
  Take(j, "bias", b.bias);
  if (j.contains("activation")) b.activation = ParseActivation(j.at("activation").get<std::string>());
}

}  // namespace

json PolicyConfigToJson(const policy::PolicyConfig& c) {
  json specs = json::array();
  for (const auto& s : c.correlation.cnn_specs) specs.push_back({s.kernel, s.stride, s.pad});
  return {{"preset", c.preset},
          {"model_dim", c.model_dim},
          {"chunk", c.chunk},
          {"action_dim", c.action_dim},
          {"latent_dim", c.latent_dim},
          {"style_layers", c.style_layers},
          {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"heads", c.heads},
          {"ffn_hidden", c.ffn_hidden},
          {"kl_weight", c.kl_weight},
          {"aggregation", c.aggregation},
          {"relative_actions", c.relative_actions},
          {"activation", ActivationName(c.activation)},
          {"cameras", c.cameras},
          {"image_height", c.image_height},
          {"image_width", c.image_width},
          {"image_channels", c.image_channels},
          {"visual_backbone", BackboneJson(c.visual_backbone)},
          {"use_correlation", c.use_correlation},
          {"correlation",
           {{"backbone", BackboneJson(c.correlation.backbone)},
            {"embed_dim", c.correlation.embed_dim},
            {"cnn_specs", specs},
            {"cnn_channels", c.correlation.cnn_channels},
            {"heads", c.correlation.heads},
            {"ffn_hidden", c.correlation.ffn_hidden},
            {"spatial_blocks", c.correlation.spatial_blocks},
            {"activation", ActivationName(c.correlation.activation)},
            {"latent_slots", c.correlation.latent_slots},
            {"scale_by_sqrt_depth", c.correlation.scale_by_sqrt_depth},
            {"camera", c.correlation.camera}}}};
}

policy::PolicyConfig PolicyConfigFromJson(const json& j) {
  CheckKeys(j,
            {"preset", "model_dim", "chunk", "action_dim", "latent_dim", "style_layers",
             "encoder_layers", "decoder_layers", "heads", "ffn_hidden", "kl_weight",
             "aggregation", "relative_actions", "activation", "cameras", "image_height", "image_width",
             "image_channels", "visual_backbone", "use_correlation", "correlation"},
            "policy config");
  std::string preset = "desk";
  Take(j, "preset", preset);
  policy::PolicyConfig c = policy::PolicyConfig::FromPreset(preset);
  Take(j, "model_dim", c.model_dim);
  Take(j, "chunk", c.chunk);
  Take(j, "action_dim", c.action_dim);
  Take(j, "latent_dim", c.latent_dim);
  Take(j, "style_layers", c.style_layers);
  Take(j, "encoder_layers", c.encoder_layers);
  Take(j, "decoder_layers", c.decoder_layers);
  Take(j, "heads", c.heads);
  Take(j, "ffn_hidden", c.ffn_hidden);
  Take(j, "kl_weight", c.kl_weight);
  Take(j, "aggregation", c.aggregation);
  Take(j, "relative_actions", c.relative_actions);
  if (j.contains("activation")) c.activation = ParseActivation(j.at("activation").get<std::string>());
  Take(j, "cameras", c.cameras);
  Take(j, "image_height", c.image_height);
  Take(j, "image_width", c.image_width);
  Take(j, "image_channels", c.image_channels);
  if (j.contains("visual_backbone")) {
    ApplyBackbone(j.at("visual_backbone"), c.visual_backbone, "visual_backbone");
  }
  Take(j, "use_correlation", c.use_correlation);
  if (j.contains("correlation")) {
    const json& k = j.at("correlation");
    CheckKeys(k,
              {"backbone", "embed_dim", "cnn_specs", "cnn_channels", "heads", "ffn_hidden",
               "spatial_blocks", "activation", "latent_slots", "scale_by_sqrt_depth", "camera"},
              "correlation");
    auto& cc = c.correlation;
    if (k.contains("backbone")) ApplyBackbone(k.at("backbone"), cc.backbone, "correlation.backbone");
    Take(k, "embed_dim", cc.embed_dim);
    if (k.contains("cnn_specs")) {
      cc.cnn_specs.clear();
      for (const json& s : k.at("cnn_specs")) {
        const auto v = s.get<std::vector<int>>();
        if (v.size() != 3) throw ConfigError("cnn_specs entries are [kernel, stride, pad]");
        cc.cnn_specs.push_back({v[0], v[1], v[2]});
      }
    }
    Take(k, "cnn_channels", cc.cnn_channels);
    Take(k, "heads", cc.heads);
    Take(k, "ffn_hidden", cc.ffn_hidden);
    Take(k, "spatial_blocks", cc.spatial_blocks);
    if (k.contains("activation")) cc.activation = ParseActivation(k.at("activation").get<std::string>());
    Take(k, "latent_slots", cc.latent_slots);
    Take(k, "scale_by_sqrt_depth", cc.scale_by_sqrt_depth);
    Take(k, "camera", cc.camera);
  }
  c.Validate();
  return c;
}

json NormalizerToJson(const policy::Normalizer& n) {
  return {{"mean", n.mean}, {"std", n.std}};
}

policy::Normalizer NormalizerFromJson(const json& j) {
  policy::Normalizer n;
  try {
    n.mean = j.at("mean").get<std::vector<double>>();
    n.std = j.at("std").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad normalizer: ") + e.what());
  }
  if (n.mean.size() != n.std.size()) throw ConfigError("normalizer size mismatch");
  return n;
}

}  // namespace ifcgrasp::harness
