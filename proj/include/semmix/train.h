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


#ifndef SEMMIX_TRAIN_H_
#define SEMMIX_TRAIN_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "semmix/metrics.h"
#include "semmix/model.h"

namespace semmix {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 12;
  int epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  // A learning rate of 0 is accepted and leaves the weights unchanged.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg);
  void step(std::vector<double>& params, const std::vector<double>& grad);
  long long steps() const { return t_; }

 private:
  TrainConfig cfg_;
  std::vector<double> m_, v_;
  long long t_ = 0;
};

struct TrainTrace {
  double initial_loss = 0.0;        // full pass before the first update
  std::vector<double> epoch_loss;   // mean loss seen while training each epoch
  double final_loss = 0.0;          // full pass after the last update

  bool operator==(const TrainTrace&) const = default;
};

double mean_loss(const HighlightModel& model, const std::vector<TrainSample>& data,
                 const ForwardHooks& hooks = {});

using EpochCallback = std::function<void(int epoch, double loss)>;

// Mini-batch Adam on the magnitude L1 loss. The shuffle order of each epoch
// is derived from the seed, so runs are reproducible. Throws NumericError
// naming the epoch and batch if the loss or gradient stops being finite.
TrainTrace train_toy(HighlightModel& model, const std::vector<TrainSample>& data,
                     const TrainConfig& cfg, const EpochCallback& on_epoch = {});

std::string trace_to_csv(const TrainTrace& trace);

// Training or evaluation clip with the material needed for stem metrics.
struct EvalClip {
  TrainSample sample;
  std::optional<StemSet> stems;
  // Stems as they appear in the input mix; a predicted mask is applied to
  // each to obtain predicted stems.
  std::optional<std::array<AudioClip, 3>> input_stems;
};

// Mean metrics of the model's remix over `clips`.
MetricsReport evaluate_model(const HighlightModel& model, const std::vector<EvalClip>& clips,
                             const EvalOptions& opts, int workers = 1);

struct SweepRow {
  int depth = 0;
  std::size_t param_count = 0;
  double mag = 0.0;
  double env = 0.0;
  double kld = 0.0;
  double w_dis = 0.0;
  double train_mag = 0.0;
  double input_train_mag = 0.0;  // MAG of the un-remixed training inputs
  double final_loss = 0.0;
};

// Trains one model per depth with identical data, seed and schedule and
// evaluates each on `eval`. Depths run concurrently on up to `workers`
// threads; rows come back in the order of `depths`.
std::vector<SweepRow> depth_sweep(const std::vector<EvalClip>& train,
                                  const std::vector<EvalClip>& eval,
                                  const std::vector<int>& depths, const ModelConfig& base,
                                  const TrainConfig& tcfg, const EvalOptions& opts,
                                  int workers = 1);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace semmix

#endif  // SEMMIX_TRAIN_H_
