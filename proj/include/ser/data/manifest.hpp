// Copyright 2026 The ser-forge Authors.
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

#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace ser::data {

struct ManifestEntry {
  std::string utterance_id;
  std::filesystem::path wav_path;
  int label = -1;
  std::optional<std::string> split_tag;
};

// CSV with header `utterance_id,wav_path,label[,split_tag]`. Relative wav
// paths are resolved against `base_dir`. Throws ManifestError naming the
// offending row for unknown labels, duplicate ids or malformed rows.
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Ids become file names in the cache tree, so only [A-Za-z0-9_.-] is allowed.
bool is_safe_utterance_id(const std::string& id);

}  // namespace ser::data
