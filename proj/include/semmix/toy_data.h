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


#ifndef SEMMIX_TOY_DATA_H_
#define SEMMIX_TOY_DATA_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semmix/metrics.h"
#include "semmix/mix.h"
#include "semmix/model.h"
#include "semmix/train.h"

namespace semmix {

// Static degradation pulling speech down and music and effects up.
LoudnessPrior toy_degradation_prior();

struct ToyDataOptions {
  int clips = 20;
  int sample_rate = 8000;
  std::size_t length = 4096;
  int c_text = 64;
  double text_noise = 0.01;
  LoudnessPrior prior = toy_degradation_prior();
};

// Synthetic clip: harmonic speech with syllable-rate AM, a sustained chord,
// and high-passed noise bursts, degraded by one static gain per stem.
struct ToyClip {
  std::string id;
  StemSet stems;
  PoorMix poor;
  std::array<double, 3> offsets_db;
  // Encodes the applied offsets along fixed random directions plus noise.
  EmbeddingVector text;

  TrainSample sample() const;
  std::array<AudioClip, 3> poor_stems() const;
};

std::vector<ToyClip> make_toy_dataset(const ToyDataOptions& opts, std::uint64_t seed);

// Stems built from bin-centred partials of `cfg` on bins at least four apart,
// each stem owning its own bins, with raised-cosine fades of `fade` samples at
// both ends. Every STFT cell of a gain-weighted sum is then dominated by a
// single stem, so mixes of these stems share phase cell by cell.
StemSet make_partial_stems(std::uint64_t seed, const StftConfig& cfg, int sample_rate = 8000,
                           std::size_t length = 4096, std::size_t fade = 512);

std::vector<EvalClip> to_eval_clips(const std::vector<ToyClip>& clips);

// Model sized for 8 kHz toy clips: 256/64 STFT, width 32, 4 heads, 64-wide
// text embedding, time-branch strides landing on the hop grid.
ModelConfig toy_model_config(int depth = 3, std::uint64_t seed = 0);

// Adam at 1e-4 for 50 epochs with single-clip batches.
TrainConfig toy_train_config(std::uint64_t seed = 0);

}  // namespace semmix

#endif  // SEMMIX_TOY_DATA_H_
