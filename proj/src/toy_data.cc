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


#include "semmix/toy_data.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "semmix/error.h"
#include "semmix/random.h"

namespace semmix {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

AudioClip toy_speech(Rng& rng, int rate, std::size_t n) {
  const double f0 = uniform(rng, 150.0, 250.0);
  const double syllable_hz = uniform(rng, 3.0, 5.0);
  const double phase = uniform(rng, 0.0, kTwoPi);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double am = 0.5 + 0.5 * std::sin(kTwoPi * syllable_hz * t + phase);
    double v = 0.0;
    for (int h = 1; h <= 8; ++h) v += std::sin(kTwoPi * h * f0 * t) / h;
    x[i] = 0.25 * am * am * v;
  }
  return AudioClip(std::move(x), rate);
}

AudioClip toy_music(Rng& rng, int rate, std::size_t n) {
  const double root = uniform(rng, 300.0, 500.0);
  const std::array<double, 3> ratios = {1.0, 1.25992, 1.49831};  // major triad
  std::array<double, 3> phases;
  for (double& p : phases) p = uniform(rng, 0.0, kTwoPi);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.0;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      v += std::sin(kTwoPi * root * ratios[k] * t + phases[k]);
    }
    x[i] = 0.12 * v;
  }
  return AudioClip(std::move(x), rate);
}

AudioClip toy_effects(Rng& rng, int rate, std::size_t n) {
  std::vector<double> gate(n, 0.0);
  const int bursts = 2 + static_cast<int>(uniform_index(rng, 3));
  const std::size_t burst_len = std::max<std::size_t>(n / 8, 1);
  for (int b = 0; b < bursts; ++b) {
    const std::size_t start = uniform_index(rng, n - burst_len + 1);
    for (std::size_t i = 0; i < burst_len; ++i) {
      const double w = std::sin(std::numbers::pi * static_cast<double>(i) / burst_len);
      gate[start + i] = std::max(gate[start + i], w);
    }
  }
  std::vector<double> x(n);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double white = standard_normal(rng);
    x[i] = 0.15 * gate[i] * (white - prev);  // first difference tilts toward high frequencies
    prev = white;
  }
  return AudioClip(std::move(x), rate);
}

}  // namespace

LoudnessPrior toy_degradation_prior() {
  LoudnessPrior p;
  p.per_stem = {UniformDb{-12.0, -6.0}, UniformDb{3.0, 9.0}, UniformDb{3.0, 9.0}};
  return p;
}

TrainSample ToyClip::sample() const {
  return TrainSample{id, poor.mix, stems.reference_mix(), text};
}

std::array<AudioClip, 3> ToyClip::poor_stems() const {
  return {apply_gain_schedule(stems.speech(), poor.schedule.curve(StemClass::kSpeech)),
          apply_gain_schedule(stems.music(), poor.schedule.curve(StemClass::kMusic)),
          apply_gain_schedule(stems.effects(), poor.schedule.curve(StemClass::kEffects))};
}

std::vector<ToyClip> make_toy_dataset(const ToyDataOptions& opts, std::uint64_t seed) {
  if (opts.clips < 1) throw ConfigError("toy dataset needs at least one clip");
  if (opts.c_text < 1) throw ConfigError("toy text width must be at least 1");
  if (opts.length < 16) throw ConfigError("toy clips need at least 16 samples");
  opts.prior.validate();

  Rng basis_rng(derive_seed(seed, "toy-text-basis"));
  std::array<std::vector<double>, 3> basis;
  for (auto& b : basis) {
    b.resize(opts.c_text);
    double norm = 0.0;
    for (double& v : b) {
      v = standard_normal(basis_rng);
      norm += v * v;
    }
    for (double& v : b) v /= std::sqrt(norm);
  }

  std::vector<ToyClip> out;
  out.reserve(opts.clips);
  for (int c = 0; c < opts.clips; ++c) {
    char id[32];
    std::snprintf(id, sizeof id, "toy_%03d", c);
    Rng rng(derive_seed(seed, id));
    StemSet stems(toy_speech(rng, opts.sample_rate, opts.length).with_id(std::string(id) + "/speech"),
                  toy_music(rng, opts.sample_rate, opts.length).with_id(std::string(id) + "/music"),
                  toy_effects(rng, opts.sample_rate, opts.length).with_id(std::string(id) + "/effects"));
    PoorMix poor = synthesize_poor_mix(stems, opts.prior, derive_seed(seed, std::string(id) + "/mix"),
                                       SynthOptions{.breakpoint_probability = 0.0});
    poor.mix = poor.mix.with_id(id);

    std::array<double, 3> offsets;
    std::vector<double> text(opts.c_text, 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      const double gain = poor.schedule.curves[k].points.front().gain;
      offsets[k] = 20.0 * std::log10(gain);
      for (int i = 0; i < opts.c_text; ++i) text[i] += offsets[k] / 10.0 * basis[k][i];
    }
    for (double& v : text) v += opts.text_noise * standard_normal(rng);

    out.push_back(ToyClip{id, std::move(stems), std::move(poor), offsets,
                          EmbeddingVector{std::move(text), "toy-text", Modality::kText}});
  }
  return out;
}

StemSet make_partial_stems(std::uint64_t seed, const StftConfig& cfg, int sample_rate,
                           std::size_t length, std::size_t fade) {
  constexpr int kSpacing = 4;
  constexpr int kPartialsPerStem = 4;
  if (length < 2 * fade || length < static_cast<std::size_t>(cfg.window_len())) {
    throw ConfigError("partial stems: clip too short for fades and window");
  }
  std::vector<int> bins;
  for (int b = kSpacing; b + kSpacing < cfg.bins(); b += kSpacing) bins.push_back(b);
  if (bins.size() < 3 * kPartialsPerStem) {
    throw ConfigError("partial stems: fft_len too small for twelve partials");
  }
  Rng rng(seed);
  for (std::size_t i = bins.size(); i > 1; --i) std::swap(bins[i - 1], bins[uniform_index(rng, i)]);

  std::vector<double> envelope(length, 1.0);
  for (std::size_t i = 0; i < fade; ++i) {
    const double e = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
    envelope[i] = e;
    envelope[length - 1 - i] = e;
  }
  std::array<std::vector<double>, 3> stems;
  for (auto& s : stems) s.assign(length, 0.0);
  for (int p = 0; p < 3 * kPartialsPerStem; ++p) {
    const double f = static_cast<double>(bins[p]) * sample_rate / cfg.fft_len();
    const double amp = uniform(rng, 0.02, 0.1);
    const double phase = uniform(rng, 0.0, kTwoPi);
    auto& s = stems[p % 3];
    for (std::size_t i = 0; i < length; ++i) {
      s[i] += envelope[i] * amp * std::sin(kTwoPi * f * static_cast<double>(i) / sample_rate + phase);
    }
  }
  return StemSet(AudioClip(std::move(stems[0]), sample_rate), AudioClip(std::move(stems[1]), sample_rate),
                 AudioClip(std::move(stems[2]), sample_rate));
}

std::vector<EvalClip> to_eval_clips(const std::vector<ToyClip>& clips) {
  std::vector<EvalClip> out;
  out.reserve(clips.size());
  for (const ToyClip& c : clips) out.push_back(EvalClip{c.sample(), c.stems, c.poor_stems()});
  return out;
}

ModelConfig toy_model_config(int depth, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.d_model = 32;
  cfg.n_heads = 4;
  cfg.depth = depth;
  cfg.c_text = ToyDataOptions{}.c_text;
  cfg.time_channels = {8, 16};
  cfg.time_kernels = {16, 8};
  cfg.time_strides = {8, 8};
  cfg.seed = seed;
  cfg.stft = StftConfig(256, 64, 256);
  cfg.validate();
  return cfg;
}

TrainConfig toy_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.batch_size = 1;
  cfg.epochs = 50;
  cfg.seed = seed;
  return cfg;
}

}  // namespace semmix
