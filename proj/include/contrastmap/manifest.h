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

#ifndef CONTRASTMAP_MANIFEST_H_
#define CONTRASTMAP_MANIFEST_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace contrastmap {

std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path& path);  // throws InputError

// Records the inputs and outputs of one CLI run and serializes them as the
// `run.json` manifest. Output entries are sorted by file name.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::filesystem::path out_dir);

  void AddInput(const std::string& role, const std::string& path);
  void SetOption(const std::string& key, nlohmann::json value) { options_[key] = std::move(value); }

  // Writes `content` to out_dir/name and records its hash. Refuses to
  // overwrite a registered input.
  void WriteArtifact(const std::string& name, std::string_view content);
  // Records a file that was already written under out_dir.
  void RecordArtifact(const std::string& name);

  std::filesystem::path PathFor(const std::string& name) const { return out_dir_ / name; }

  nlohmann::json ToJson() const;
  void Finish();  // writes run.json

 private:
  std::string subcommand_;
  std::filesystem::path out_dir_;
  nlohmann::json inputs_ = nlohmann::json::array();
  std::vector<std::filesystem::path> input_paths_;
  nlohmann::json options_ = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> outputs_;  // name, sha256
};

// Checks every hash recorded in out_dir/run.json against the files on disk.
bool VerifyManifest(const std::filesystem::path& out_dir, std::string* problem = nullptr);

}  // namespace contrastmap

#endif  // CONTRASTMAP_MANIFEST_H_
