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

#include "ifcgrasp/io/container.h"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ifcgrasp/errors.h"

namespace ifcgrasp::io {

static_assert(std::endian::native == std::endian::little,
              "blob format is little-endian");

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t Fnv1a(const void* data, size_t bytes, uint64_t hash) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < bytes; ++i) {
    hash ^= p[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string HexDigest(uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string ConfigHash(const json& config) {
  const std::string text = config.dump();
  return HexDigest(Fnv1a(text.data(), text.size()));
}

namespace {

void Diff(const json& a, const json& b, const std::string& path,
          std::vector<std::string>& out) {
  if (a.is_object() && b.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k)) {
        out.push_back(path + "/" + k + ": missing");
      } else {
        Diff(v, b.at(k), path + "/" + k, out);
      }
    }
    for (const auto& [k, v] : b.items()) {
      if (!a.contains(k)) out.push_back(path + "/" + k + ": unexpected");
    }
    return;
  }
  if (a != b) out.push_back(path + ": expected " + a.dump() + ", got " + b.dump());
}

}  // namespace

std::string JsonDiff(const json& expected, const json& actual) {
  std::vector<std::string> lines;
  Diff(expected, actual, "", lines);
  std::string s;
  for (const auto& l : lines) s += (s.empty() ? "" : "; ") + l;
  return s;
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

ContainerWriter::ContainerWriter(fs::path dir, std::string kind)
    : dir_(std::move(dir)), kind_(std::move(kind)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  fs::remove(dir_ / "manifest.json", ec);
}

void ContainerWriter::Put(const std::string& name, const num::Array<float>& a) {
  if (name.empty() || name.find('/') != std::string::npos) {
    throw IoError("bad stream name '" + name + "'");
  }
  const std::string file = name + ".f32";
  const size_t bytes = static_cast<size_t>(a.size()) * sizeof(float);
  std::ofstream f(dir_ / file, std::ios::binary);
  if (!f) throw IoError("cannot open stream " + name + " for writing");
  f.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(bytes));
  if (!f) throw IoError("write failed for stream " + name);
  streams_[name] = {{"file", file},
                    {"dtype", "f32"},
                    {"shape", a.shape()},
                    {"bytes", bytes},
                    {"fnv1a", HexDigest(Fnv1a(a.data(), bytes))}};
}

void ContainerWriter::Finish() {
  json manifest = {{"format", "ifcgrasp-container"},
                   {"version", kFormatVersion},
                   {"kind", kind_},
                   {"streams", streams_},
                   {"meta", meta_}};
  WriteTextFile(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

ContainerReader::ContainerReader(fs::path dir, const std::string& kind)
    : dir_(std::move(dir)) {
  const fs::path path = dir_ / "manifest.json";
  try {
    manifest_ = json::parse(ReadTextFile(path));
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (manifest_.value("format", "") != "ifcgrasp-container" ||
      !manifest_.contains("streams") || !manifest_.contains("meta")) {
    throw IoError(path.string() + " is not an ifcgrasp container");
  }
  const std::string version = manifest_.value("version", "");
  if (version.substr(0, version.find('.')) !=
      std::string(kFormatVersion).substr(0, 1)) {
    throw IoError("unsupported container version " + version);
  }
  if (manifest_.value("kind", "") != kind) {
    throw IoError(path.string() + " holds a '" + manifest_.value("kind", "") +
                  "', expected '" + kind + "'");
  }
}

bool ContainerReader::Has(const std::string& name) const {
  return manifest_.at("streams").contains(name);
}

std::vector<std::string> ContainerReader::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : manifest_.at("streams").items()) out.push_back(k);
  return out;
}

num::Array<float> ContainerReader::Get(const std::string& name) const {
  if (!Has(name)) throw IoError("stream '" + name + "' not in container");
  const json& s = manifest_.at("streams").at(name);
  if (s.value("dtype", "") != "f32") {
    throw IoError("stream '" + name + "' has unsupported dtype");
  }
  const num::Shape shape = s.at("shape").get<num::Shape>();
  num::Array<float> a(shape);
  const size_t bytes = static_cast<size_t>(a.size()) * sizeof(float);
  if (s.at("bytes").get<size_t>() != bytes) {
    throw IoError("stream '" + name + "': manifest size disagrees with shape");
  }
  const fs::path path = dir_ / s.at("file").get<std::string>();
  std::error_code ec;
  const auto on_disk = fs::file_size(path, ec);
  if (ec) throw IoError("stream '" + name + "': cannot stat " + path.string());
  if (on_disk != bytes) {
    throw IoError("stream '" + name + "' is truncated: expected " +
                  std::to_string(bytes) + " bytes, found " + std::to_string(on_disk));
  }
  std::ifstream f(path, std::ios::binary);
  f.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(bytes));
  if (!f) throw IoError("stream '" + name + "': read failed");
  if (HexDigest(Fnv1a(a.data(), bytes)) != s.at("fnv1a").get<std::string>()) {
    throw IoError("stream '" + name + "': checksum mismatch");
  }
  return a;
}

}  // namespace ifcgrasp::io
