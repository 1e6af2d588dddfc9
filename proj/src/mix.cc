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

#include "semmix/mix.h"

#include <algorithm>
#include <cmath>

#include "semmix/error.h"

namespace semmix {
namespace {

std::vector<double> weighted_sum(const std::array<const AudioClip*, 3>& clips,
                                 const std::array<double, 3>& gains) {
  std::vector<double> out(clips[0]->size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = gains[0] * (*clips[0])[i] + gains[1] * (*clips[1])[i] +
             gains[2] * (*clips[2])[i];
  }
  return out;
}

double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace

std::size_t stem_index(StemClass c) {
  switch (c) {
    case StemClass::kSpeech: return 0;
    case StemClass::kMusic: return 1;
    case StemClass::kEffects: return 2;
    case StemClass::kMix: break;
  }
  throw DomainError("stem_index: 'mix' is not a stem");
}

StemSet::StemSet(AudioClip speech, AudioClip music, AudioClip effects,
                 std::optional<AudioClip> reference_mix,
                 std::array<double, 3> reference_gains)
    : stems_{std::move(speech), std::move(music), std::move(effects)},
      reference_gains_(reference_gains),
      reference_mix_(stems_[0]) {
  require_same_shape(stems_[0], stems_[1], "StemSet speech/music");
  require_same_shape(stems_[0], stems_[2], "StemSet speech/effects");
  const std::vector<double> sum =
      weighted_sum({&stems_[0], &stems_[1], &stems_[2]}, reference_gains_);
  if (reference_mix) {
    require_same_shape(stems_[0], *reference_mix, "StemSet reference mix");
    double worst = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      worst = std::max(worst, std::abs(sum[i] - (*reference_mix)[i]));
    }
    // Allows for 16-bit quantization of each stored file.
    if (worst > 1e-3) {
      throw DataError("StemSet: reference mix deviates from the recorded stem "
                      "combination by " + std::to_string(worst));
    }
    reference_mix_ = std::move(*reference_mix);
  } else {
    reference_mix_ = AudioClip(sum, stems_[0].sample_rate(), stems_[0].id());
  }
}

const AudioClip& StemSet::stem(StemClass c) const { return stems_[stem_index(c)]; }

AudioClip StemSet::reference_stem(StemClass c) const {
  return stem(c).scaled(reference_gains_[stem_index(c)]);
}

// ---------------------------------------------------------------------------
// Gain schedules

void GainCurve::validate() const {
  if (points.empty()) throw DataError("GainCurve: no breakpoints");
  if (points.front().start != 0) throw DataError("GainCurve: first breakpoint must be at sample 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].gain) || points[i].gain < 0.0) {
      throw DataError("GainCurve: gains must be finite and non-negative");
    }
    if (i > 0 && points[i].start <= points[i - 1].start) {
      throw DataError("GainCurve: breakpoints must be strictly increasing");
    }
  }
}

double GainCurve::gain_at(std::size_t i) const {
  auto next = std::upper_bound(points.begin(), points.end(), i,
                               [](std::size_t v, const Breakpoint& b) { return v < b.start; });
  const Breakpoint& cur = *(next - 1);
  if (interpolation == Interpolation::kHold || next == points.end()) return cur.gain;
  const double frac = static_cast<double>(i - cur.start) /
                      static_cast<double>(next->start - cur.start);
  return cur.gain + (next->gain - cur.gain) * frac;
}

AudioClip apply_gain_schedule(const AudioClip& clip, const GainCurve& curve) {
  curve.validate();
  if (curve.points.back().start >= clip.size()) {
    throw DataError("apply_gain_schedule: breakpoint at sample " +
                    std::to_string(curve.points.back().start) +
                    " is beyond the clip end (" + std::to_string(clip.size()) + ")");
  }
  std::vector<double> out(clip.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= curve.gain_at(i);
  return AudioClip(std::move(out), clip.sample_rate(), clip.id());
}

AudioClip mix_with_schedule(const StemSet& stems, const GainSchedule& schedule) {
  const AudioClip s = apply_gain_schedule(stems.speech(), schedule.curve(StemClass::kSpeech));
  const AudioClip m = apply_gain_schedule(stems.music(), schedule.curve(StemClass::kMusic));
  const AudioClip e = apply_gain_schedule(stems.effects(), schedule.curve(StemClass::kEffects));
  return AudioClip(weighted_sum({&s, &m, &e}, {1.0, 1.0, 1.0}), stems.sample_rate(),
                   stems.speech().id());
}

// ---------------------------------------------------------------------------
// Loudness priors

void validate(const LoudnessDistribution& d) {
  std::visit(
      [](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, UniformDb>) {
          // lo == hi is a point mass.
          if (!std::isfinite(dist.lo) || !std::isfinite(dist.hi) || dist.lo > dist.hi) {
            throw ConfigError("uniform loudness prior needs finite lo <= hi");
          }
        } else if constexpr (std::is_same_v<T, NormalDb>) {
          if (!std::isfinite(dist.mean) || !std::isfinite(dist.stddev) || dist.stddev < 0.0) {
            throw ConfigError("normal loudness prior needs finite mean and stddev >= 0");
          }
        } else {
          if (dist.values.empty()) throw ConfigError("empirical loudness prior is empty");
          for (double v : dist.values) {
            if (!std::isfinite(v)) throw ConfigError("empirical loudness prior has non-finite value");
          }
        }
      },
      d);
}

double sample_db(const LoudnessDistribution& d, Rng& rng) {
  return std::visit(
      [&rng](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, UniformDb>) {
          return uniform(rng, dist.lo, dist.hi);
        } else if constexpr (std::is_same_v<T, NormalDb>) {
          return dist.mean + dist.stddev * standard_normal(rng);
        } else {
          return dist.values[uniform_index(rng, dist.values.size())];
        }
      },
      d);
}

LoudnessPrior LoudnessPrior::constant(double db_speech, double db_music,
                                      double db_effects) {
  LoudnessPrior p;
  p.per_stem = {UniformDb{db_speech, db_speech}, UniformDb{db_music, db_music},
                UniformDb{db_effects, db_effects}};
  return p;
}

void LoudnessPrior::validate() const {
  for (const auto& d : per_stem) semmix::validate(d);
}

// ---------------------------------------------------------------------------
// Synthesis

PoorMix synthesize_poor_mix(const StemSet& stems, const LoudnessPrior& prior,
                            std::uint64_t seed, const SynthOptions& options) {
  prior.validate();
  Rng rng(seed);
  GainSchedule schedule;
  const std::size_t n = stems.size();
  for (StemClass c : kStemClasses) {
    GainCurve& curve = schedule.curve(c);
    curve.interpolation = Interpolation::kHold;
    curve.points = {{0, db_to_gain(sample_db(prior.for_stem(c), rng))}};
    const bool split = uniform01(rng) < options.breakpoint_probability;
    if (split && n >= 3) {
      const std::size_t lo = n / 3, hi = 2 * n / 3;
      const std::size_t at = std::max<std::size_t>(1, lo + uniform_index(rng, hi - lo + 1));
      curve.points.push_back({at, db_to_gain(sample_db(prior.for_stem(c), rng))});
    }
  }
  AudioClip mix = mix_with_schedule(stems, schedule);
  const double peak = peak_abs(mix.samples());
  if (peak > options.peak_limit) {
    throw ClippingError("synthesize_poor_mix: peak " + std::to_string(peak) +
                        " exceeds limit " + std::to_string(options.peak_limit) +
                        "; renormalize the stems");
  }
  return {std::move(mix), std::move(schedule)};
}

CdxRemix cdx_baseline_remix(const StemSet& stems, const LoudnessPrior& prior,
                            std::uint64_t seed, double floor_db) {
  prior.validate();
  Rng rng(seed);
  CdxRemix out{.mix = stems.reference_mix()};
  const double anchor = integrated_loudness(stems.reference_mix().samples(), floor_db);
  for (StemClass c : kStemClasses) {
    const std::size_t k = stem_index(c);
    out.targets_db[k] = anchor + sample_db(prior.for_stem(c), rng);
    const double current = integrated_loudness(stems.stem(c).samples(), floor_db);
    if (current <= floor_db) {
      out.gains[k] = 1.0;
      out.warnings.push_back(to_string(c) + " stem is silent; passed through unscaled");
      continue;
    }
    out.gains[k] = db_to_gain(out.targets_db[k] - current);
  }
  out.mix = AudioClip(
      weighted_sum({&stems.speech(), &stems.music(), &stems.effects()}, out.gains),
      stems.sample_rate(), stems.speech().id());
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const GainSchedule& schedule) {
  nlohmann::json j;
  j["format_version"] = 1;
  for (StemClass c : kStemClasses) {
    const GainCurve& curve = schedule.curve(c);
    nlohmann::json points = nlohmann::json::array();
    for (const Breakpoint& b : curve.points) {
      points.push_back({{"start", b.start}, {"gain", b.gain}});
    }
    j["stems"][to_string(c)] = {
        {"interpolation", curve.interpolation == Interpolation::kHold ? "hold" : "linear"},
        {"breakpoints", points}};
  }
  return j;
}

GainSchedule schedule_from_json(const nlohmann::json& j) {
  GainSchedule schedule;
  try {
    for (StemClass c : kStemClasses) {
      const auto& s = j.at("stems").at(to_string(c));
      GainCurve& curve = schedule.curve(c);
      const std::string interp = s.at("interpolation").get<std::string>();
      if (interp != "hold" && interp != "linear") {
        throw DataError("schedule: unknown interpolation '" + interp + "'");
      }
      curve.interpolation = interp == "hold" ? Interpolation::kHold : Interpolation::kLinear;
      curve.points.clear();
      for (const auto& b : s.at("breakpoints")) {
        curve.points.push_back({b.at("start").get<std::size_t>(), b.at("gain").get<double>()});
      }
      curve.validate();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schedule JSON: ") + e.what());
  }
  return schedule;
}

nlohmann::json to_json(const LoudnessPrior& prior) {
  nlohmann::json j;
  for (StemClass c : kStemClasses) {
    j[to_string(c)] = std::visit(
        [](const auto& d) -> nlohmann::json {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, UniformDb>) {
            return {{"type", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
          } else if constexpr (std::is_same_v<T, NormalDb>) {
            return {{"type", "normal"}, {"mean", d.mean}, {"std", d.stddev}};
          } else {
            return {{"type", "empirical"}, {"values", d.values}};
          }
        },
        prior.for_stem(c));
  }
  return j;
}

LoudnessPrior prior_from_json(const nlohmann::json& j) {
  LoudnessPrior prior;
  try {
    for (StemClass c : kStemClasses) {
      const auto& d = j.at(to_string(c));
      const std::string type = d.at("type").get<std::string>();
      auto& slot = prior.per_stem[stem_index(c)];
      if (type == "uniform") {
        slot = UniformDb{d.at("lo").get<double>(), d.at("hi").get<double>()};
      } else if (type == "normal") {
        slot = NormalDb{d.at("mean").get<double>(), d.at("std").get<double>()};
      } else if (type == "empirical") {
        slot = EmpiricalDb{d.at("values").get<std::vector<double>>()};
      } else {
        throw ConfigError("loudness prior: unknown type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("loudness prior JSON: ") + e.what());
  }
  prior.validate();
  return prior;
}

}  // namespace semmix
