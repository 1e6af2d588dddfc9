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


#include "semmix/train.h"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "semmix/error.h"
#include "semmix/parallel.h"
#include "semmix/random.h"

namespace semmix {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"optimizer", "adam"},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"adam_eps", cfg.adam_eps},
          {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  try {
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Adam::Adam(std::size_t n, const TrainConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {
  cfg_.validate();
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ShapeError("Adam: parameter or gradient size changed");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.adam_eps);
  }
}

double mean_loss(const HighlightModel& model, const std::vector<TrainSample>& data,
                 const ForwardHooks& hooks) {
  if (data.empty()) throw DataError("mean_loss: empty dataset");
  double total = 0.0;
  for (const TrainSample& s : data) {
    total += loss_l1(forward_remix(model, s.input, s.text, hooks).audio, s.target,
                     model.config().stft);
  }
  return total / static_cast<double>(data.size());
}

TrainTrace train_toy(HighlightModel& model, const std::vector<TrainSample>& data,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.empty()) throw DataError("train_toy: empty dataset");
  Adam opt(model.param_count(), cfg);
  TrainTrace trace;
  trace.initial_loss = mean_loss(model, data);

  const std::size_t n = data.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::size_t> order(n);
  std::vector<double> losses(n);
  std::vector<double> acc(model.param_count());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, "epoch-" + std::to_string(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

    for (std::size_t start = 0, b = 0; start < n; start += batch, ++b) {
      const std::size_t stop = std::min(n, start + batch);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        LossGrad lg;
        try {
          lg = loss_and_grad(model, data[order[i]]);
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                             ": " + e.what());
        }
        losses[order[i]] = lg.loss;
        for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += lg.grad[p];
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (double& g : acc) {
        g *= scale;
        if (!std::isfinite(g)) {
          throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(b));
        }
      }
      opt.step(model.params(), acc);
    }
    double total = 0.0;
    for (double l : losses) total += l;
    trace.epoch_loss.push_back(total / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch, trace.epoch_loss.back());
  }
  trace.final_loss = mean_loss(model, data);
  return trace;
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::ostringstream out;
  char line[96];
  out << "epoch,kind,loss\n";
  std::snprintf(line, sizeof line, "0,initial,%.17g\n", trace.initial_loss);
  out << line;
  for (std::size_t e = 0; e < trace.epoch_loss.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu,epoch,%.17g\n", e + 1, trace.epoch_loss[e]);
    out << line;
  }
  std::snprintf(line, sizeof line, "%zu,final,%.17g\n", trace.epoch_loss.size(),
                trace.final_loss);
  out << line;
  return out.str();
}

MetricsReport evaluate_model(const HighlightModel& model, const std::vector<EvalClip>& clips,
                             const EvalOptions& opts, int workers) {
  if (clips.empty()) throw DataError("evaluate_model: no clips");
  std::vector<MetricsReport> reports(clips.size());
  parallel_for(clips.size(), workers, [&](std::size_t i) {
    const EvalClip& c = clips[i];
    const RemixResult r = forward_remix(model, c.sample.input, c.sample.text);
    ClipInputs in{.clip_id = c.sample.id, .pred = r.audio, .ref = c.sample.target};
    in.stems = c.stems;
    if (c.input_stems) {
      std::array<AudioClip, 3> pred_stems = *c.input_stems;
      for (auto& s : pred_stems) s = apply_mask(s, r.mask, model.config().stft);
      in.pred_stems = std::move(pred_stems);
    }
    reports[i] = evaluate_clip(in, opts);
  });
  return aggregate(std::move(reports));
}

std::vector<SweepRow> depth_sweep(const std::vector<EvalClip>& train,
                                  const std::vector<EvalClip>& eval,
                                  const std::vector<int>& depths, const ModelConfig& base,
                                  const TrainConfig& tcfg, const EvalOptions& opts,
                                  int workers) {
  if (depths.empty()) throw ConfigError("depth_sweep: no depths given");
  if (train.empty() || eval.empty()) throw DataError("depth_sweep: empty train or eval set");
  for (int d : depths) {
    ModelConfig c = base;
    c.depth = d;
    c.validate();
  }
  tcfg.validate();

  std::vector<TrainSample> samples;
  for (const auto& c : train) samples.push_back(c.sample);
  double input_mag = 0.0;
  for (const auto& s : samples) input_mag += mag(s.input, s.target, opts.stft);
  input_mag /= static_cast<double>(samples.size());

  std::vector<SweepRow> rows(depths.size());
  parallel_for(depths.size(), workers, [&](std::size_t i) {
    ModelConfig cfg = base;
    cfg.depth = depths[i];
    HighlightModel model(cfg);
    const TrainTrace trace = train_toy(model, samples, tcfg);
    const MetricsReport m = evaluate_model(model, eval, opts);
    if (!m.ok()) throw DataError("depth " + std::to_string(depths[i]) + ": " + m.errors);
    double train_mag = 0.0;
    for (const auto& s : samples) {
      train_mag += mag(forward_remix(model, s.input, s.text).audio, s.target, opts.stft);
    }
    rows[i] = SweepRow{cfg.depth,
                       model.param_count(),
                       m.mag,
                       m.env,
                       m.kld,
                       m.w_dis,
                       train_mag / static_cast<double>(samples.size()),
                       input_mag,
                       trace.final_loss};
  });
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "depth,param_count,mag,env,kld,w_dis,train_mag,input_train_mag,final_loss\n";
  char line[256];
  for (const SweepRow& r : rows) {
    std::snprintf(line, sizeof line, "%d,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.depth, r.param_count, r.mag, r.env, r.kld, r.w_dis, r.train_mag,
                  r.input_train_mag, r.final_loss);
    out << line;
  }
  return out.str();
}

}  // namespace semmix
