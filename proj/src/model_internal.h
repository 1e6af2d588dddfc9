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


#ifndef SEMMIX_SRC_MODEL_INTERNAL_H_
#define SEMMIX_SRC_MODEL_INTERNAL_H_

#include <optional>
#include <vector>

#include "semmix/model.h"

namespace semmix::detail {

struct Slot {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct BlockSlots {
  Slot ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
};

struct ModelSlots {
  std::vector<Slot> conv_w, conv_b;
  Slot time_proj, freq_w, freq_b, text_w, text_b, text_null;
  std::vector<BlockSlots> blocks;
  Slot lnf_g, lnf_b, mask_w, mask_b;
};

// Appends a ParamGroup per slot when `groups` is non-null.
ModelSlots build_slots(const ModelConfig& cfg, std::vector<ParamGroup>* groups);

using ConstMap = Eigen::Map<const RealMatrix>;
using MutMap = Eigen::Map<RealMatrix>;

inline ConstMap view(const std::vector<double>& p, const Slot& s) {
  return ConstMap(p.data() + s.offset, static_cast<Eigen::Index>(s.rows),
                  static_cast<Eigen::Index>(s.cols));
}
inline MutMap view(std::vector<double>& p, const Slot& s) {
  return MutMap(p.data() + s.offset, static_cast<Eigen::Index>(s.rows),
                static_cast<Eigen::Index>(s.cols));
}

struct LnCache {
  RealMatrix xhat;
  Eigen::VectorXd rstd;
};

struct BlockCache {
  RealMatrix a, q, k, v, o, b, hpre, g;
  LnCache ln1, ln2;
  std::vector<RealMatrix> att;
};

struct ForwardCache {
  Spectrogram spec;
  RealMatrix logmag;
  bool forced = false;
  std::vector<RealMatrix> conv_cols, conv_out;
  std::vector<Eigen::Index> pool_idx;
  RealMatrix pooled;
  std::optional<Eigen::RowVectorXd> text;
  std::vector<BlockCache> blocks;
  LnCache lnf;
  RealMatrix normed, sig, mask;
};

void forward_network(const HighlightModel& model, const ModelSlots& slots,
                     const AudioClip& clip, const std::optional<EmbeddingVector>& text,
                     const ForwardHooks& hooks, ForwardCache* cache);

// Accumulates dL/dparams into `grad` given dL/dmask.
void backward_network(const HighlightModel& model, const ModelSlots& slots,
                      const ForwardCache& cache, const ForwardHooks& hooks,
                      const RealMatrix& dmask, std::vector<double>* grad);

inline constexpr double kLayerNormEps = 1e-5;

}  // namespace semmix::detail

#endif  // SEMMIX_SRC_MODEL_INTERNAL_H_
