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

#include <cmath>

#include "gtest/gtest.h"
#include "semmix/error.h"
#include "semmix/mix.h"
#include "test_util.h"

namespace semmix {
namespace {

using testing::random_clip;
using testing::rms_diff;
using testing::sine_clip;

StemSet make_stems(std::size_t n = 6000, unsigned seed = 1) {
  return StemSet(random_clip(n, seed).scaled(0.6), sine_clip(n, 440.0, 0.3, 16000),
                 random_clip(n, seed + 7).scaled(0.2));
}

TEST(StemSetTest, DefaultReferenceIsUnitSum) {
  const StemSet stems = make_stems();
  for (std::size_t i = 0; i < stems.size(); i += 97) {
    EXPECT_EQ(stems.reference_mix()[i],
              stems.speech()[i] + stems.music()[i] + stems.effects()[i]);
  }
}

TEST(StemSetTest, RejectsMismatchedStemsAndInconsistentMix) {
  EXPECT_THROW(StemSet(random_clip(100, 1), random_clip(101, 2), random_clip(100, 3)),
               ShapeError);
  const AudioClip a = random_clip(100, 1), b = random_clip(100, 2), c = random_clip(100, 3);
  EXPECT_THROW(StemSet(a, b, c, a), DataError);
  EXPECT_NO_THROW(StemSet(a, b, c, a + b + c));
}

TEST(GainScheduleTest, SingleUnitBreakpointIsIdentity) {
  const AudioClip x = random_clip(500, 3);
  const AudioClip y = apply_gain_schedule(x, GainCurve{});
  EXPECT_EQ(x.data(), y.data());
}

TEST(GainScheduleTest, HoldHalves) {
  const AudioClip x = random_clip(500, 4);
  const AudioClip y = apply_gain_schedule(x, GainCurve{{{0, 0.5}}, Interpolation::kHold});
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], 0.5 * x[i]);
}

TEST(GainScheduleTest, LinearRamp) {
  constexpr std::size_t kN = 101;
  const AudioClip ones(std::vector<double>(kN, 1.0));
  const GainCurve ramp{{{0, 0.0}, {kN - 1, 1.0}}, Interpolation::kLinear};
  const AudioClip y = apply_gain_schedule(ones, ramp);
  for (std::size_t i = 0; i < kN; ++i) {
    EXPECT_NEAR(y[i], static_cast<double>(i) / (kN - 1), 1e-15);
  }
}

TEST(GainScheduleTest, BreakpointBeyondEndIsRangeError) {
  const AudioClip x = random_clip(100, 5);
  EXPECT_THROW(apply_gain_schedule(x, GainCurve{{{0, 1.0}, {100, 0.5}}}), DataError);
  EXPECT_THROW(apply_gain_schedule(x, GainCurve{{{1, 1.0}}}), DataError);
  EXPECT_THROW(apply_gain_schedule(x, GainCurve{{{0, 1.0}, {10, 0.5}, {10, 0.2}}}), DataError);
  EXPECT_THROW(apply_gain_schedule(x, GainCurve{{{0, -1.0}}}), DataError);
}

TEST(PoorMixTest, ZeroDbPriorIsUnitMixdown) {
  const StemSet stems = make_stems();
  const PoorMix pm = synthesize_poor_mix(stems, LoudnessPrior::constant(0, 0, 0), 42);
  EXPECT_EQ(pm.mix.data(), stems.reference_mix().data());
}

TEST(PoorMixTest, MusicOnlyAttenuation) {
  const StemSet stems = make_stems();
  const LoudnessPrior prior = LoudnessPrior::constant(0.0, -12.0, 0.0);
  const PoorMix pm = synthesize_poor_mix(stems, prior, 3);
  const double g = std::pow(10.0, -12.0 / 20.0);
  EXPECT_NEAR(g, 0.251, 1e-3);
  for (std::size_t i = 0; i < stems.size(); ++i) {
    const double music = pm.mix[i] - stems.speech()[i] - stems.effects()[i];
    EXPECT_NEAR(music, g * stems.music()[i], 1e-12);
  }
}

TEST(PoorMixTest, DeterministicGivenSeed) {
  const StemSet stems = make_stems();
  const LoudnessPrior prior;
  const PoorMix a = synthesize_poor_mix(stems, prior, 7);
  const PoorMix b = synthesize_poor_mix(stems, prior, 7);
  const PoorMix c = synthesize_poor_mix(stems, prior, 8);
  EXPECT_EQ(a.mix.data(), b.mix.data());
  EXPECT_EQ(a.schedule, b.schedule);
  EXPECT_FALSE(a.schedule == c.schedule);
}

TEST(PoorMixTest, MixIsSumOfScheduledStemsAndScheduleIsRecoverable) {
  const StemSet stems = make_stems();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PoorMix pm = synthesize_poor_mix(stems, LoudnessPrior{}, seed);
    std::vector<double> sum(stems.size(), 0.0);
    for (StemClass c : kStemClasses) {
      const AudioClip scheduled = apply_gain_schedule(stems.stem(c), pm.schedule.curve(c));
      for (std::size_t i = 0; i < sum.size(); ++i) {
        sum[i] += scheduled[i];
        if (std::abs(stems.stem(c)[i]) > 1e-6) {
          EXPECT_NEAR(scheduled[i] / stems.stem(c)[i], pm.schedule.curve(c).gain_at(i), 1e-9);
        }
      }
    }
    EXPECT_EQ(sum, pm.mix.data());
  }
}

TEST(PoorMixTest, PeakOverflowIsClippingError) {
  const StemSet stems = make_stems();
  EXPECT_THROW(synthesize_poor_mix(stems, LoudnessPrior::constant(20, 20, 20), 1), ClippingError);
}

TEST(CdxTest, CurrentLoudnessTargetsGiveUnitMixdown) {
  const StemSet stems = make_stems();
  const double anchor = integrated_loudness(stems.reference_mix().samples());
  LoudnessPrior prior;
  for (StemClass c : kStemClasses) {
    const double rel = integrated_loudness(stems.stem(c).samples()) - anchor;
    prior.per_stem[stem_index(c)] = UniformDb{rel, rel};
  }
  const CdxRemix out = cdx_baseline_remix(stems, prior, 5);
  EXPECT_LT(rms_diff(out.mix.data(), stems.reference_mix().data()), 1e-6);
  EXPECT_TRUE(out.warnings.empty());
}

TEST(CdxTest, SpeechPlusSixDbDoublesAmplitude) {
  const StemSet stems = make_stems();
  const double anchor = integrated_loudness(stems.reference_mix().samples());
  LoudnessPrior prior;
  for (StemClass c : kStemClasses) {
    double rel = integrated_loudness(stems.stem(c).samples()) - anchor;
    if (c == StemClass::kSpeech) rel += 20.0 * std::log10(2.0);
    prior.per_stem[stem_index(c)] = UniformDb{rel, rel};
  }
  const CdxRemix out = cdx_baseline_remix(stems, prior, 5);
  EXPECT_NEAR(out.gains[0], 2.0, 1e-6);
  EXPECT_NEAR(out.gains[1], 1.0, 1e-9);
  std::vector<double> expected(stems.size());
  for (std::size_t i = 0; i < stems.size(); ++i) {
    expected[i] = 2.0 * stems.speech()[i] + stems.music()[i] + stems.effects()[i];
  }
  EXPECT_LT(rms_diff(out.mix.data(), expected), 1e-6);
}

TEST(CdxTest, SilentStemPassesThrough) {
  const std::size_t n = 4000;
  const StemSet stems(random_clip(n, 1), sine_clip(n, 300.0, 0.2, 16000),
                      AudioClip(std::vector<double>(n, 0.0), 16000));
  const CdxRemix out = cdx_baseline_remix(stems, LoudnessPrior{}, 9);
  ASSERT_EQ(out.warnings.size(), 1u);
  EXPECT_NE(out.warnings[0].find("effects"), std::string::npos);
  EXPECT_EQ(out.gains[2], 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(out.mix[i], out.gains[0] * stems.speech()[i] + out.gains[1] * stems.music()[i],
                1e-12);
  }
}

TEST(CdxTest, HitsSampledTargets) {
  const StemSet stems = make_stems();
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const CdxRemix out = cdx_baseline_remix(stems, LoudnessPrior{}, seed);
    for (StemClass c : kStemClasses) {
      const std::size_t k = stem_index(c);
      const double achieved = integrated_loudness(stems.stem(c).scaled(out.gains[k]).samples());
      EXPECT_NEAR(achieved, out.targets_db[k], 0.01);
    }
  }
}

TEST(PriorTest, ValidationAndSampling) {
  EXPECT_THROW(validate(LoudnessDistribution{UniformDb{1.0, 0.0}}), ConfigError);
  EXPECT_THROW(validate(LoudnessDistribution{EmpiricalDb{}}), ConfigError);
  EXPECT_THROW(validate(LoudnessDistribution{NormalDb{0.0, -1.0}}), ConfigError);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double v = sample_db(EmpiricalDb{{-3.0, 2.0}}, rng);
    EXPECT_TRUE(v == -3.0 || v == 2.0);
    const double u = sample_db(UniformDb{-15.0, 5.0}, rng);
    EXPECT_GE(u, -15.0);
    EXPECT_LT(u, 5.0);
  }
}

TEST(JsonTest, ScheduleAndPriorRoundTrip) {
  const PoorMix pm = synthesize_poor_mix(make_stems(), LoudnessPrior{}, 11);
  EXPECT_EQ(schedule_from_json(nlohmann::json::parse(to_json(pm.schedule).dump())), pm.schedule);

  LoudnessPrior prior;
  prior.per_stem = {UniformDb{-3, 1}, NormalDb{0.5, 2.0}, EmpiricalDb{{1.0, 2.0}}};
  const LoudnessPrior back = prior_from_json(to_json(prior));
  EXPECT_EQ(to_json(back), to_json(prior));
  EXPECT_THROW(schedule_from_json(nlohmann::json::parse(R"({"stems":{}})")), DataError);
}

}  // namespace
}  // namespace semmix
