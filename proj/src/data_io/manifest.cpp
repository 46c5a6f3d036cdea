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

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "ser/data/labels.hpp"
#include "ser/data/manifest.hpp"
#include "ser/errors.hpp"

namespace ser::data {

std::string_view class_name(int label) {
  if (label < 0 || label >= kNumClasses) throw InvalidInput("class id out of range: " + std::to_string(label));
  return kClassNames[static_cast<std::size_t>(label)];
}

int parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "angry" || lower == "ang") return 0;
  if (lower == "sadness" || lower == "sad") return 1;
  if (lower == "happiness" || lower == "hap" || lower == "excited" || lower == "exc") return 2;
  if (lower == "neutral" || lower == "neu") return 3;
  throw InvalidInput("unknown emotion label '" + std::string(text) + "'");
}

bool is_safe_utterance_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char ch) {
    return std::isalnum(ch) || ch == '_' || ch == '-' || ch == '.';
  });
}

namespace {

std::string trim(std::string s) {
  const auto keep = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), keep));
  s.erase(std::find_if(s.rbegin(), s.rend(), keep).base(), s.end());
  return s;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  std::string line;
  if (!std::getline(in, line)) throw ManifestError("manifest is empty (missing header)");
  const auto header = split_row(trim(line));
  const bool has_tag = header.size() == 4 && header[3] == "split_tag";
  if (header.size() < 3 || header[0] != "utterance_id" || header[1] != "wav_path" || header[2] != "label" ||
      (header.size() == 4 && !has_tag) || header.size() > 4) {
    throw ManifestError("manifest header must be 'utterance_id,wav_path,label[,split_tag]', got '" + trim(line) + "'");
  }

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  for (int row = 2; std::getline(in, line); ++row) {
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_row(line);
    const std::string where = "manifest row " + std::to_string(row);
    if (fields.size() != header.size()) {
      throw ManifestError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                          std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.utterance_id = fields[0];
    if (!is_safe_utterance_id(e.utterance_id)) {
      throw ManifestError(where + ": utterance id '" + e.utterance_id + "' must match [A-Za-z0-9_.-]+");
    }
    if (!seen.insert(e.utterance_id).second) {
      throw ManifestError(where + ": duplicate utterance id '" + e.utterance_id + "'");
    }
    if (fields[1].empty()) throw ManifestError(where + ": empty wav_path");
    e.wav_path = fields[1];
    if (e.wav_path.is_relative() && !base_dir.empty()) e.wav_path = base_dir / e.wav_path;
    try {
      e.label = parse_label(fields[2]);
    } catch (const InvalidInput& err) {
      throw ManifestError(where + ": " + err.what());
    }
    if (has_tag && !fields[3].empty()) e.split_tag = fields[3];
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << "utterance_id,wav_path,label,split_tag\n";
  for (const auto& e : entries) {
    out << e.utterance_id << ',' << e.wav_path.string() << ',' << class_name(e.label) << ','
        << e.split_tag.value_or("") << '\n';
  }
}

}  // namespace ser::data
