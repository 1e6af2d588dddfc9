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

#include "semmix/manifest.h"

#include <fstream>
#include <set>

#include "semmix/error.h"

namespace semmix {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json to_json(const ManifestEntry& e) {
  nlohmann::json j;
  j["clip_id"] = e.clip_id;
  if (!e.stems.empty()) j["stems"] = e.stems;
  if (e.reference_gains != std::array<double, 3>{1.0, 1.0, 1.0}) {
    j["reference_gains"] = e.reference_gains;
  }
  auto put = [&j](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  put("reference_mix", e.reference_mix);
  put("poor_mix", e.poor_mix);
  put("schedule", e.schedule);
  put("pred", e.pred);
  if (!e.pred_stems.empty()) j["pred_stems"] = e.pred_stems;
  if (!e.captions.empty()) j["captions"] = e.captions;
  if (!e.embeddings.empty()) j["embeddings"] = e.embeddings;
  if (!e.event_dists.empty()) j["event_dists"] = e.event_dists;
  return j;
}

ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
  ManifestEntry e;
  try {
    e.clip_id = j.at("clip_id").get<std::string>();
    e.stems = j.value("stems", std::map<std::string, std::string>{});
    if (j.contains("reference_gains")) {
      e.reference_gains = j.at("reference_gains").get<std::array<double, 3>>();
    }
    e.reference_mix = j.value("reference_mix", "");
    e.poor_mix = j.value("poor_mix", "");
    e.schedule = j.value("schedule", "");
    e.pred = j.value("pred", "");
    e.pred_stems = j.value("pred_stems", std::map<std::string, std::string>{});
    e.captions = j.value("captions", std::vector<std::string>{});
    e.embeddings = j.value("embeddings", std::map<std::string, std::string>{});
    e.event_dists = j.value("event_dists", std::map<std::string, std::string>{});
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("manifest entry: ") + ex.what());
  }
  if (e.clip_id.empty()) throw DataError("manifest entry with empty clip_id");
  return e;
}

Manifest Manifest::load(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  Manifest m;
  m.base_dir = path.parent_path();
  try {
    m.format_version = j.value("format_version", 1);
    m.sample_rate = j.value("sample_rate", 0);
    for (const auto& c : j.at("clips")) m.clips.push_back(manifest_entry_from_json(c));
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
  if (m.format_version != 1) {
    throw DataError(path.string() + ": unsupported manifest format_version " +
                    std::to_string(m.format_version));
  }
  std::set<std::string> seen;
  for (const auto& c : m.clips) {
    if (!seen.insert(c.clip_id).second) {
      throw DataError(path.string() + ": duplicate clip_id '" + c.clip_id + "'");
    }
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["format_version"] = format_version;
  j["sample_rate"] = sample_rate;
  j["clips"] = nlohmann::json::array();
  for (const auto& c : clips) j["clips"].push_back(to_json(c));
  write_json_file(path, j);
}

std::filesystem::path Manifest::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

const ManifestEntry* Manifest::find(const std::string& clip_id) const {
  for (const auto& c : clips) {
    if (c.clip_id == clip_id) return &c;
  }
  return nullptr;
}

}  // namespace semmix
