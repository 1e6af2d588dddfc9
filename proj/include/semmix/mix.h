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

#ifndef SEMMIX_MIX_H_
#define SEMMIX_MIX_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "semmix/audio.h"
#include "semmix/dsp.h"
#include "semmix/random.h"

namespace semmix {

inline constexpr std::array<StemClass, 3> kStemClasses = {
    StemClass::kSpeech, StemClass::kMusic, StemClass::kEffects};

std::size_t stem_index(StemClass c);

// Speech, music and effects stems sharing rate and length. The reference mix
// is either supplied or the gain-weighted sum of the stems (unit gains by
// default); `reference_gains` records the combination either way.
class StemSet {
 public:
  StemSet(AudioClip speech, AudioClip music, AudioClip effects,
          std::optional<AudioClip> reference_mix = std::nullopt,
          std::array<double, 3> reference_gains = {1.0, 1.0, 1.0});

  const AudioClip& stem(StemClass c) const;
  const AudioClip& speech() const { return stems_[0]; }
  const AudioClip& music() const { return stems_[1]; }
  const AudioClip& effects() const { return stems_[2]; }
  const std::array<double, 3>& reference_gains() const { return reference_gains_; }
  const AudioClip& reference_mix() const { return reference_mix_; }

  // Stem as it appears inside the reference mix.
  AudioClip reference_stem(StemClass c) const;

  std::size_t size() const { return stems_[0].size(); }
  int sample_rate() const { return stems_[0].sample_rate(); }

 private:
  std::array<AudioClip, 3> stems_;
  std::array<double, 3> reference_gains_;
  AudioClip reference_mix_;
};

enum class Interpolation { kHold, kLinear };

struct Breakpoint {
  std::size_t start = 0;  // sample index
  double gain = 1.0;      // linear
  bool operator==(const Breakpoint&) const = default;
};

// Piecewise gain curve. Breakpoints are strictly increasing, the first sits
// at sample 0, gains are finite and non-negative. After the last breakpoint
// the gain is held.
struct GainCurve {
  std::vector<Breakpoint> points{{0, 1.0}};
  Interpolation interpolation = Interpolation::kHold;

  void validate() const;
  double gain_at(std::size_t i) const;
  bool operator==(const GainCurve&) const = default;
};

struct GainSchedule {
  std::array<GainCurve, 3> curves;  // speech, music, effects

  const GainCurve& curve(StemClass c) const { return curves[stem_index(c)]; }
  GainCurve& curve(StemClass c) { return curves[stem_index(c)]; }
  bool operator==(const GainSchedule&) const = default;
};

// Multiplies every sample by the curve. Throws DataError if a breakpoint lies
// beyond the end of the clip.
AudioClip apply_gain_schedule(const AudioClip& clip, const GainCurve& curve);

struct UniformDb {
  double lo = -15.0;
  double hi = 5.0;
};
struct NormalDb {
  double mean = 0.0;
  double stddev = 1.0;
};
struct EmpiricalDb {
  std::vector<double> values;
};
using LoudnessDistribution = std::variant<UniformDb, NormalDb, EmpiricalDb>;

void validate(const LoudnessDistribution& d);
double sample_db(const LoudnessDistribution& d, Rng& rng);

// Per-stem-class distribution over loudness offsets in dB. For poor-mix
// synthesis an offset is a gain relative to the stem itself; for the CDX
// baseline it is a target level relative to the loudness of the stem mixdown.
struct LoudnessPrior {
  std::array<LoudnessDistribution, 3> per_stem{UniformDb{}, UniformDb{}, UniformDb{}};

  static LoudnessPrior constant(double db_speech, double db_music, double db_effects);
  const LoudnessDistribution& for_stem(StemClass c) const {
    return per_stem[stem_index(c)];
  }
  void validate() const;
};

struct SynthOptions {
  // Chance of a second, independently drawn gain starting in the middle third.
  double breakpoint_probability = 0.5;
  double peak_limit = 4.0;
};

struct PoorMix {
  AudioClip mix;
  GainSchedule schedule;
};

// Static random gain per stem (plus an optional mid-clip breakpoint), summed.
// Deterministic given the seed. Throws ClippingError when |peak| exceeds
// options.peak_limit.
PoorMix synthesize_poor_mix(const StemSet& stems, const LoudnessPrior& prior,
                            std::uint64_t seed, const SynthOptions& options = {});

// Sum of gain-scheduled stems (no peak check).
AudioClip mix_with_schedule(const StemSet& stems, const GainSchedule& schedule);

struct CdxRemix {
  AudioClip mix;
  std::array<double, 3> targets_db{};
  std::array<double, 3> gains{1.0, 1.0, 1.0};
  std::vector<std::string> warnings;
};

// Rescales each stem so its integrated loudness equals mixdown loudness plus
// a sampled offset, then sums. Silent stems (at the floor) pass unscaled and
// are reported in `warnings`.
CdxRemix cdx_baseline_remix(const StemSet& stems, const LoudnessPrior& prior,
                            std::uint64_t seed,
                            double floor_db = kDefaultFloorDb);

nlohmann::json to_json(const GainSchedule& schedule);
GainSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LoudnessPrior& prior);
LoudnessPrior prior_from_json(const nlohmann::json& j);

}  // namespace semmix

#endif  // SEMMIX_MIX_H_
