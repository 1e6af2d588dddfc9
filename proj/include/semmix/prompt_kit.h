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


#ifndef SEMMIX_PROMPT_KIT_H_
#define SEMMIX_PROMPT_KIT_H_

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace semmix {

enum class Aspect { kEmotion, kObjects, kScene, kTone, kSoundSources, kCameraFocus };
enum class PromptFamily { kFocused, kMinimal };

inline constexpr std::array<Aspect, 6> kAspects = {
    Aspect::kEmotion, Aspect::kObjects,      Aspect::kScene,
    Aspect::kTone,    Aspect::kSoundSources, Aspect::kCameraFocus};
inline constexpr std::array<PromptFamily, 2> kPromptFamilies = {PromptFamily::kFocused,
                                                                PromptFamily::kMinimal};

inline constexpr std::string_view kAbstentionToken = "none";

// Snake-case names ("sound_sources", "focused") as used in asset file names.
std::string to_string(Aspect a);
std::string to_string(PromptFamily f);
// Accepts snake case and CamelCase, case-insensitively.
Aspect aspect_from_string(std::string_view s);
PromptFamily family_from_string(std::string_view s);

// True only for (SoundSources, Focused).
bool abstention_allowed(Aspect a, PromptFamily f);

// The twelve templates, read from `<aspect>.<family>.txt` files.
class TemplateStore {
 public:
  // Every file must exist and be non-empty; missing ones are listed together
  // in a single ConfigError.
  static TemplateStore load(const std::filesystem::path& dir);

  // $SEMMIX_PROMPT_DIR if set, otherwise the assets shipped with the source
  // tree. Loaded once per process.
  static const TemplateStore& default_store();
  static std::filesystem::path default_dir();

  const std::string& get(Aspect a, PromptFamily f) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::pair<Aspect, PromptFamily>, std::string> templates_;
};

std::string template_file_name(Aspect a, PromptFamily f);

std::string render_prompt(const TemplateStore& store, Aspect a, PromptFamily f);
std::string render_prompt(Aspect a, PromptFamily f);

struct Caption {
  std::string clip_id;
  Aspect aspect = Aspect::kEmotion;
  PromptFamily family = PromptFamily::kFocused;
  std::string text;
  bool abstained = false;

  bool operator==(const Caption&) const = default;
};

struct CaptionLimits {
  std::size_t max_words = 64;
};

struct ValidatedCaption {
  Caption caption;
  bool truncated = false;
  // "none" returned where abstention is not part of the prompt.
  bool stray_abstention = false;
};

std::size_t word_count(std::string_view text);

ValidatedCaption validate_caption(std::string_view raw, Aspect aspect, PromptFamily family,
                                  const CaptionLimits& limits = {}, std::string clip_id = "");

struct CaptionGroupStats {
  std::size_t count = 0;
  double mean_words = 0.0;
  std::size_t max_words = 0;
  double abstention_rate = 0.0;
};

struct PromptStats {
  std::map<std::pair<Aspect, PromptFamily>, CaptionGroupStats> groups;
  // Mean words per caption over each family, all aspects pooled.
  std::map<PromptFamily, double> family_mean_words;
};

PromptStats prompt_stats(const std::vector<Caption>& captions);
std::string render_prompt_stats(const PromptStats& stats);

nlohmann::json to_json(const Caption& c);
Caption caption_from_json(const nlohmann::json& j);

void write_captions_jsonl(const std::filesystem::path& path, const std::vector<Caption>& captions);
std::vector<Caption> read_captions_jsonl(const std::filesystem::path& path);

}  // namespace semmix

#endif  // SEMMIX_PROMPT_KIT_H_
