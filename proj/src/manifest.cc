/*
 * Copyright 2026 The contrastmap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "contrastmap/manifest.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#include "contrastmap/errors.h"

#ifndef CONTRASTMAP_VERSION
#define CONTRASTMAP_VERSION "0.0.0"
#endif

namespace contrastmap {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256 init failed");
    }
  }
  void Update(const void* data, size_t size) { EVP_DigestUpdate(ctx_.get(), data, size); }
  std::string HexDigest() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx_.get(), digest.data(), &length);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string Sha256Hex(std::string_view data) {
  Sha256 h;
  h.Update(data.data(), data.size());
  return h.HexDigest();
}

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buffer;
  while (in) {
    in.read(buffer.data(), buffer.size());
    h.Update(buffer.data(), static_cast<size_t>(in.gcount()));
  }
  return h.HexDigest();
}

RunManifest::RunManifest(std::string subcommand, std::filesystem::path out_dir)
    : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)) {}

void RunManifest::AddInput(const std::string& role, const std::string& path) {
  inputs_.push_back({{"role", role}, {"path", path}, {"sha256", Sha256File(path)}});
  input_paths_.push_back(path);
}

void RunManifest::WriteArtifact(const std::string& name, std::string_view content) {
  for (const auto& input : input_paths_) {
    std::error_code ec;
    if (std::filesystem::equivalent(input, PathFor(name), ec)) {
      throw InputError("output would overwrite input " + input.string());
    }
  }
  std::ofstream out(PathFor(name), std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + PathFor(name).string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw InputError("write failed: " + PathFor(name).string());
  outputs_.emplace_back(name, Sha256Hex(content));
}

void RunManifest::RecordArtifact(const std::string& name) { outputs_.emplace_back(name, Sha256File(PathFor(name))); }

nlohmann::json RunManifest::ToJson() const {
  auto sorted = outputs_;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [name, hash] : sorted) outputs.push_back({{"file", name}, {"sha256", hash}});
  return {{"tool", "contrastmap"},
          {"version", CONTRASTMAP_VERSION},
          {"format_version", 1},
          {"subcommand", subcommand_},
          {"options", options_},
          {"inputs", inputs_},
          {"outputs", outputs}};
}

void RunManifest::Finish() {
  const std::string text = ToJson().dump(2) + "\n";
  std::ofstream out(PathFor("run.json"), std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write run.json");
  out << text;
}

bool VerifyManifest(const std::filesystem::path& out_dir, std::string* problem) {
  std::ifstream in(out_dir / "run.json", std::ios::binary);
  if (!in) {
    if (problem) *problem = "missing run.json";
    return false;
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("outputs")) {
    if (problem) *problem = "unreadable run.json";
    return false;
  }
  for (const auto& entry : j["outputs"]) {
    const auto file = entry.at("file").get<std::string>();
    std::error_code ec;
    if (!std::filesystem::exists(out_dir / file, ec) || Sha256File(out_dir / file) != entry.at("sha256")) {
      if (problem) *problem = "hash mismatch: " + file;
      return false;
    }
  }
  return true;
}

}  // namespace contrastmap
