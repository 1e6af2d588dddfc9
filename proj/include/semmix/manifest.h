// Copyright 2026 The semmix Authors.
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

#ifndef SEMMIX_MANIFEST_H_
#define SEMMIX_MANIFEST_H_

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace semmix {

// One clip of a dataset manifest. Paths are stored as written (relative to
// the manifest's directory unless absolute); an empty string means absent.
struct ManifestEntry {
  std::string clip_id;
  std::map<std::string, std::string> stems;  // speech, music, effects
  std::array<double, 3> reference_gains{1.0, 1.0, 1.0};
  std::string reference_mix;
  std::string poor_mix;
  std::string schedule;
  std::string pred;
  std::map<std::string, std::string> pred_stems;
  std::vector<std::string> captions;
  std::map<std::string, std::string> embeddings;   // video, audio_ref, audio_pred, text
  std::map<std::string, std::string> event_dists;  // ref, pred

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  int format_version = 1;
  int sample_rate = 0;  // 0: take whatever the files carry
  std::vector<ManifestEntry> clips;
  std::filesystem::path base_dir;

  static Manifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::filesystem::path resolve(const std::string& p) const;
  const ManifestEntry* find(const std::string& clip_id) const;
};

nlohmann::json to_json(const ManifestEntry& e);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);

// Reads and parses a JSON file; DataError on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace semmix

#endif  // SEMMIX_MANIFEST_H_
