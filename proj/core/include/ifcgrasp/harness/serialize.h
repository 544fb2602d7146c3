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

#ifndef IFCGRASP_HARNESS_SERIALIZE_H_
#define IFCGRASP_HARNESS_SERIALIZE_H_

#include <nlohmann/json.hpp>

#include "ifcgrasp/numerics/optim.h"
#include "ifcgrasp/policy/config.h"
#include "ifcgrasp/policy/normalizer.h"

namespace ifcgrasp::harness {

nlohmann::json PolicyConfigToJson(const policy::PolicyConfig& config);
// Starts from the "preset" entry (default desk) and applies every other key
// as an override. Unknown keys and bad values raise ConfigError.
policy::PolicyConfig PolicyConfigFromJson(const nlohmann::json& j);

nlohmann::json NormalizerToJson(const policy::Normalizer& n);
policy::Normalizer NormalizerFromJson(const nlohmann::json& j);

}  // namespace ifcgrasp::harness

#endif  // IFCGRASP_HARNESS_SERIALIZE_H_
