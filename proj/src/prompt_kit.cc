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


#include "semmix/prompt_kit.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "semmix/error.h"

namespace semmix {
namespace {

constexpr std::string_view kWhitespace = " \t\r\n\f\v";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(kWhitespace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kWhitespace);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    i = s.find_first_not_of(kWhitespace, i);
    if (i == std::string_view::npos) break;
    std::size_t j = s.find_first_of(kWhitespace, i);
    if (j == std::string_view::npos) j = s.size();
    words.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string normalize_key(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '_' || c == '-' || c == ' ') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool is_abstention(std::string_view text) {
  std::string_view t = trim(text);
  while (!t.empty() && std::string_view(".!\"'").find(t.back()) != std::string_view::npos)
    t.remove_suffix(1);
  while (!t.empty() && (t.front() == '"' || t.front() == '\'')) t.remove_prefix(1);
  return normalize_key(t) == kAbstentionToken;
}

// Splits an object inventory on commas, semicolons and line breaks, strips
// list bullets and trailing periods, and drops empty items.
std::vector<std::string> object_items(std::string_view text) {
  std::vector<std::string> items;
  std::string cur;
  auto flush = [&] {
    std::string_view item = trim(cur);
    while (!item.empty() && std::string_view("-*").find(item.front()) != std::string_view::npos) {
      item.remove_prefix(1);
      item = trim(item);
    }
    while (!item.empty() && item.back() == '.') item.remove_suffix(1);
    const std::string collapsed = join(split_words(item), " ");
    if (!collapsed.empty()) items.push_back(collapsed);
    cur.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';' || c == '\n') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return items;
}

}  // namespace

std::string to_string(Aspect a) {
  switch (a) {
    case Aspect::kEmotion: return "emotion";
    case Aspect::kObjects: return "objects";
    case Aspect::kScene: return "scene";
    case Aspect::kTone: return "tone";
    case Aspect::kSoundSources: return "sound_sources";
    case Aspect::kCameraFocus: return "camera_focus";
  }
  return "unknown";
}

std::string to_string(PromptFamily f) {
  return f == PromptFamily::kFocused ? "focused" : "minimal";
}

Aspect aspect_from_string(std::string_view s) {
  const std::string key = normalize_key(s);
  for (Aspect a : kAspects) {
    if (normalize_key(to_string(a)) == key) return a;
  }
  throw ConfigError("unknown aspect '" + std::string(s) + "'");
}

PromptFamily family_from_string(std::string_view s) {
  const std::string key = normalize_key(s);
  for (PromptFamily f : kPromptFamilies) {
    if (to_string(f) == key) return f;
  }
  throw ConfigError("unknown prompt family '" + std::string(s) + "'");
}

bool abstention_allowed(Aspect a, PromptFamily f) {
  return a == Aspect::kSoundSources && f == PromptFamily::kFocused;
}

std::string template_file_name(Aspect a, PromptFamily f) {
  return to_string(a) + "." + to_string(f) + ".txt";
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
  TemplateStore store;
  store.dir_ = dir;
  std::vector<std::string> problems;
  for (Aspect a : kAspects) {
    for (PromptFamily f : kPromptFamilies) {
      const auto path = dir / template_file_name(a, f);
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        problems.push_back("missing " + path.string());
        continue;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      const std::string text(trim(ss.str()));
      if (text.empty()) {
        problems.push_back("empty " + path.string());
        continue;
      }
      store.templates_[{a, f}] = text;
    }
  }
  if (!problems.empty()) {
    throw ConfigError("prompt templates in " + dir.string() + ": " + join(problems, "; "));
  }
  return store;
}

std::filesystem::path TemplateStore::default_dir() {
  if (const char* env = std::getenv("SEMMIX_PROMPT_DIR"); env && *env) return env;
  return SEMMIX_DEFAULT_PROMPT_DIR;
}

const TemplateStore& TemplateStore::default_store() {
  static const TemplateStore store = load(default_dir());
  return store;
}

const std::string& TemplateStore::get(Aspect a, PromptFamily f) const {
  return templates_.at({a, f});
}

std::string render_prompt(const TemplateStore& store, Aspect a, PromptFamily f) {
  return store.get(a, f);
}

std::string render_prompt(Aspect a, PromptFamily f) {
  return render_prompt(TemplateStore::default_store(), a, f);
}

std::size_t word_count(std::string_view text) { return split_words(text).size(); }

ValidatedCaption validate_caption(std::string_view raw, Aspect aspect, PromptFamily family,
                                  const CaptionLimits& limits, std::string clip_id) {
  if (limits.max_words == 0) throw ConfigError("caption word cap must be positive");
  ValidatedCaption out;
  out.caption.clip_id = std::move(clip_id);
  out.caption.aspect = aspect;
  out.caption.family = family;

  const std::string_view trimmed = trim(raw);
  if (trimmed.empty()) throw ValidationError("empty caption for " + to_string(aspect));

  if (is_abstention(trimmed)) {
    if (abstention_allowed(aspect, family)) {
      out.caption.text = std::string(kAbstentionToken);
      out.caption.abstained = true;
      return out;
    }
    out.stray_abstention = true;
  }

  if (aspect == Aspect::kObjects) {
    std::vector<std::string> kept;
    std::size_t words = 0;
    for (auto& item : object_items(trimmed)) {
      const std::size_t n = word_count(item);
      if (words + n > limits.max_words) {
        out.truncated = true;
        if (words < limits.max_words) {
          auto w = split_words(item);
          w.resize(limits.max_words - words);
          kept.push_back(join(w, " "));
        }
        break;
      }
      words += n;
      kept.push_back(std::move(item));
    }
    if (kept.empty()) throw ValidationError("object list has no items");
    out.caption.text = join(kept, ", ");
    return out;
  }

  auto words = split_words(trimmed);
  if (words.size() > limits.max_words) {
    words.resize(limits.max_words);
    out.truncated = true;
  }
  out.caption.text = join(words, " ");
  return out;
}

PromptStats prompt_stats(const std::vector<Caption>& captions) {
  if (captions.empty()) throw ValidationError("prompt_stats needs at least one caption");
  PromptStats stats;
  std::map<std::pair<Aspect, PromptFamily>, std::pair<double, double>> sums;  // words, abstained
  std::map<PromptFamily, std::pair<double, std::size_t>> family_sums;
  for (const Caption& c : captions) {
    const std::size_t n = word_count(c.text);
    auto& g = stats.groups[{c.aspect, c.family}];
    auto& s = sums[{c.aspect, c.family}];
    ++g.count;
    g.max_words = std::max(g.max_words, n);
    s.first += static_cast<double>(n);
    s.second += c.abstained ? 1.0 : 0.0;
    family_sums[c.family].first += static_cast<double>(n);
    ++family_sums[c.family].second;
  }
  for (auto& [key, g] : stats.groups) {
    g.mean_words = sums[key].first / static_cast<double>(g.count);
    g.abstention_rate = sums[key].second / static_cast<double>(g.count);
  }
  for (const auto& [f, s] : family_sums) {
    stats.family_mean_words[f] = s.first / static_cast<double>(s.second);
  }
  return stats;
}

std::string render_prompt_stats(const PromptStats& stats) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %-8s %6s %10s %9s %10s\n", "aspect", "family", "count",
                "mean_words", "max_words", "abstention");
  out << line;
  for (const auto& [key, g] : stats.groups) {
    std::snprintf(line, sizeof line, "%-14s %-8s %6zu %10.2f %9zu %10.2f\n",
                  to_string(key.first).c_str(), to_string(key.second).c_str(), g.count,
                  g.mean_words, g.max_words, g.abstention_rate);
    out << line;
  }
  const auto focused = stats.family_mean_words.find(PromptFamily::kFocused);
  const auto minimal = stats.family_mean_words.find(PromptFamily::kMinimal);
  if (focused != stats.family_mean_words.end() && minimal != stats.family_mean_words.end()) {
    std::snprintf(line, sizeof line,
                  "focused vs minimal mean words: %.2f vs %.2f (difference %+.2f)\n",
                  focused->second, minimal->second, focused->second - minimal->second);
    out << line;
  }
  return out.str();
}

nlohmann::json to_json(const Caption& c) {
  return {{"clip_id", c.clip_id},
          {"aspect", to_string(c.aspect)},
          {"family", to_string(c.family)},
          {"text", c.text},
          {"abstained", c.abstained}};
}

Caption caption_from_json(const nlohmann::json& j) {
  Caption c;
  try {
    c.clip_id = j.at("clip_id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    c.abstained = j.at("abstained").get<bool>();
    c.aspect = aspect_from_string(j.at("aspect").get<std::string>());
    c.family = family_from_string(j.at("family").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("caption record: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("caption record: ") + e.what());
  }
  if (c.abstained && c.text != kAbstentionToken) {
    throw ValidationError("abstained caption must have text \"none\"");
  }
  if (!c.abstained && trim(c.text).empty()) throw ValidationError("caption text is empty");
  return c;
}

void write_captions_jsonl(const std::filesystem::path& path,
                          const std::vector<Caption>& captions) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const Caption& c : captions) out << to_json(c).dump() << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<Caption> read_captions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<Caption> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(caption_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace semmix
