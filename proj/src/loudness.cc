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

#include <algorithm>
#include <cmath>

#include "semmix/dsp.h"
#include "semmix/error.h"

namespace semmix {

std::string to_string(StemClass c) {
  switch (c) {
    case StemClass::kSpeech: return "speech";
    case StemClass::kMusic: return "music";
    case StemClass::kEffects: return "effects";
    case StemClass::kMix: return "mix";
  }
  return "unknown";
}

StemClass stem_class_from_string(const std::string& s) {
  if (s == "speech") return StemClass::kSpeech;
  if (s == "music") return StemClass::kMusic;
  if (s == "effects") return StemClass::kEffects;
  if (s == "mix") return StemClass::kMix;
  throw DataError("unknown stem class '" + s + "'");
}

double integrated_loudness(std::span<const double> x, double floor_db) {
  const double level = rms(x);
  if (level <= 0.0) return floor_db;
  return std::max(floor_db, 20.0 * std::log10(level));
}

LoudnessTrajectory loudness_trajectory(const AudioClip& clip, int frame_len,
                                       int hop, double floor_db,
                                       StemClass stem_class) {
  if (frame_len < 1 || hop < 1) {
    throw ConfigError("loudness_trajectory: frame_len and hop must be positive");
  }
  if (static_cast<std::size_t>(frame_len) > clip.size()) {
    throw ShapeError("loudness_trajectory: frame_len " + std::to_string(frame_len) +
                     " exceeds clip length " + std::to_string(clip.size()));
  }
  if (!std::isfinite(floor_db)) throw ConfigError("loudness_trajectory: floor_db must be finite");

  LoudnessTrajectory traj{.frames = {},
                          .frame_len = frame_len,
                          .hop = hop,
                          .stem_class = stem_class,
                          .floor_db = floor_db};
  const std::size_t count = (clip.size() - frame_len) / hop + 1;
  traj.frames.reserve(count);
  const auto s = clip.samples();
  for (std::size_t t = 0; t < count; ++t) {
    traj.frames.push_back(
        integrated_loudness(s.subspan(t * hop, frame_len), floor_db));
  }
  return traj;
}

}  // namespace semmix
