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

// Directory container: manifest.json plus one little-endian row-major f32
// blob per named stream, each with an FNV-1a checksum.

#ifndef IFCGRASP_IO_CONTAINER_H_
#define IFCGRASP_IO_CONTAINER_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifcgrasp/numerics/array.h"

namespace ifcgrasp::io {

inline constexpr char kFormatVersion[] = "1.0.0";

uint64_t Fnv1a(const void* data, size_t bytes,
               uint64_t hash = 14695981039346656037ull);
std::string HexDigest(uint64_t hash);
// FNV-1a of the canonical (sorted-key, compact) JSON text.
std::string ConfigHash(const nlohmann::json& config);

// Human-readable list of differing leaves, for hash-mismatch errors.
std::string JsonDiff(const nlohmann::json& expected, const nlohmann::json& actual);

class ContainerWriter {
 public:
  ContainerWriter(std::filesystem::path dir, std::string kind);

  void Put(const std::string& name, const num::Array<float>& array);
  nlohmann::json& meta() { return meta_; }
  // Writes manifest.json last so a partial container never validates.
  void Finish();

 private:
  std::filesystem::path dir_;
  std::string kind_;
  nlohmann::json streams_ = nlohmann::json::object();
  nlohmann::json meta_ = nlohmann::json::object();
};

class ContainerReader {
 public:
  // Throws IoError if the manifest is missing, malformed or of another kind.
  ContainerReader(std::filesystem::path dir, const std::string& kind);

  const nlohmann::json& meta() const { return manifest_.at("meta"); }
  bool Has(const std::string& name) const;
  std::vector<std::string> names() const;
  // Throws IoError naming the stream on a size, shape or checksum mismatch.
  num::Array<float> Get(const std::string& name) const;

 private:
  std::filesystem::path dir_;
  nlohmann::json manifest_;
};

void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace ifcgrasp::io

#endif  // IFCGRASP_IO_CONTAINER_H_
