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


#ifndef SEMMIX_MODEL_H_
#define SEMMIX_MODEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "semmix/audio.h"
#include "semmix/dsp.h"
#include "semmix/metrics.h"

namespace semmix {

inline constexpr int kMaxDepth = 6;

struct ModelConfig {
  int d_model = 64;
  int n_heads = 4;
  int depth = 3;
  int c_text = 4096;
  int ffn_mult = 4;
  // Time branch: strided valid 1-D convolutions with tanh, one entry per layer.
  std::vector<int> time_channels = {16, 32};
  std::vector<int> time_kernels = {32, 8};
  std::vector<int> time_strides = {16, 32};
  double mask_max = 4.0;
  std::uint64_t seed = 0;
  StftConfig stft;

  void validate() const;
  int frequency_bins() const { return stft.bins(); }
  int time_stride() const;
  // Input span of one output sample of the time branch.
  int time_receptive_field() const;

  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct ParamGroup {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

// Dual-branch encoder, text context, `depth` pre-norm transformer blocks and
// a sigmoid mask head, all parameters held in one flat vector.
class HighlightModel {
 public:
  // Scaled-uniform init: weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases
  // and LayerNorm shifts 0, LayerNorm scales 1.
  explicit HighlightModel(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  std::size_t param_count() const { return params_.size(); }
  const std::vector<ParamGroup>& groups() const { return groups_; }
  const ParamGroup& group(const std::string& name) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

 private:
  ModelConfig cfg_;
  std::vector<ParamGroup> groups_;
  std::vector<double> params_;
};

std::size_t param_count(const ModelConfig& cfg);

struct ForwardHooks {
  // Replace the predicted mask by this constant.
  std::optional<double> force_mask;
  // Drop the time branch so frame features come from the frequency branch only.
  bool bypass_time_branch = false;
};

struct RemixResult {
  AudioClip audio;
  RealMatrix mask;  // frames x bins, each cell in [0, mask_max]
};

// Mask the input STFT and resynthesize with the input phase. A missing text
// embedding is replaced by the learned null token.
RemixResult forward_remix(const HighlightModel& model, const AudioClip& poor_mix,
                          const std::optional<EmbeddingVector>& text,
                          const ForwardHooks& hooks = {});

// Applies `mask` to every clip's STFT and resynthesizes; used to carry one
// predicted mask over to individual stems.
AudioClip apply_mask(const AudioClip& clip, const RealMatrix& mask, const StftConfig& cfg);

// clip(|target| / (|poor| + 1e-8), 0, mask_max)
RealMatrix oracle_mask(const Spectrogram& poor, const Spectrogram& target, double mask_max);

// Mean absolute difference of STFT magnitudes; equals mag(pred, target) / 100.
double loss_l1(const AudioClip& pred, const AudioClip& target, const StftConfig& cfg);

struct TrainSample {
  std::string id;
  AudioClip input;
  AudioClip target;
  std::optional<EmbeddingVector> text;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as HighlightModel::params()
};

LossGrad loss_and_grad(const HighlightModel& model, const TrainSample& sample,
                       const ForwardHooks& hooks = {});

struct GroupGradError {
  std::string name;
  double rel_error = 0.0;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_group;
  std::vector<GroupGradError> groups;
};

// Central differences over every parameter. Per group the relative error is
// |a - n| / max(|a| + |n|, zero_floor * |g|) in the 2-norm, where g is the
// full analytic gradient. Groups whose exact gradient is zero (attention key
// biases) are thus measured against the model's gradient scale instead of
// their own rounding noise.
GradCheckResult grad_check(const HighlightModel& model, const TrainSample& sample,
                           double epsilon = 1e-6, const ForwardHooks& hooks = {},
                           double zero_floor = 1e-6);

}  // namespace semmix

#endif  // SEMMIX_MODEL_H_
