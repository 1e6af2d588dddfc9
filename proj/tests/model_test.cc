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
#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "semmix/checkpoint.h"
#include "semmix/error.h"
#include "semmix/model.h"
#include "semmix/parallel.h"
#include "semmix/toy_data.h"
#include "semmix/train.h"
#include "test_util.h"

namespace semmix {
namespace {

using testing::random_clip;
using testing::random_samples;
using testing::rms_diff;

// Parameter count written out from the layer shapes.
std::size_t count_from_shapes(const ModelConfig& c) {
  const std::size_t d = c.d_model, f = c.stft.fft_len() / 2 + 1, h = c.ffn_mult * d;
  std::size_t n = 0, cin = 1;
  for (std::size_t l = 0; l < c.time_channels.size(); ++l) {
    n += c.time_channels[l] * cin * c.time_kernels[l] + c.time_channels[l];
    cin = c.time_channels[l];
  }
  n += cin * d;                     // time projection
  n += f * d + d;                   // frequency branch
  n += c.c_text * d + d + d;        // text projection and null token
  const std::size_t block = 2 * d + 4 * (d * d + d) + 2 * d + (d * h + h) + (h * d + d);
  n += c.depth * block;
  n += 2 * d + d * f + f;           // final norm and mask head
  return n;
}

ModelConfig tiny_config(int depth) {
  ModelConfig cfg;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.depth = depth;
  cfg.c_text = 4;
  cfg.ffn_mult = 2;
  cfg.time_channels = {3, 4};
  cfg.time_kernels = {4, 4};
  cfg.time_strides = {2, 4};
  cfg.seed = 7;
  cfg.stft = StftConfig(16, 8, 16, WindowType::kRectangular, PadMode::kNone);
  return cfg;
}

// 24 samples: two frames of the tiny config.
TrainSample tiny_sample(std::uint64_t seed, bool with_text = true) {
  TrainSample s{"tiny", AudioClip(random_samples(24, seed), 8000),
                AudioClip(random_samples(24, seed + 100), 8000), std::nullopt};
  if (with_text) s.text = EmbeddingVector{random_samples(4, seed + 200), "t", Modality::kText};
  return s;
}

TEST(ModelConfigTest, Validation) {
  EXPECT_NO_THROW(ModelConfig{}.validate());
  ModelConfig c;
  c.n_heads = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.depth = 7;
  EXPECT_THROW(c.validate(), ConfigError);
  c.depth = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mask_max = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.c_text = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.time_kernels.pop_back();
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(HighlightModel{c}, ConfigError);
}

TEST(ModelConfigTest, JsonRoundTrip) {
  const ModelConfig c = toy_model_config(2, 99);
  EXPECT_EQ(model_config_from_json(to_json(c)), c);
  EXPECT_EQ(c.time_stride(), c.stft.hop());
}

TEST(BuildModelTest, Deterministic) {
  const ModelConfig c = toy_model_config(2, 5);
  EXPECT_EQ(HighlightModel(c).params(), HighlightModel(c).params());
  ModelConfig other = c;
  other.seed = 6;
  EXPECT_NE(HighlightModel(c).params(), HighlightModel(other).params());
  for (double p : HighlightModel(c).params()) ASSERT_TRUE(std::isfinite(p));
}

TEST(BuildModelTest, ParamCountFormula) {
  for (const ModelConfig& base : {ModelConfig{}, toy_model_config(0), tiny_config(0)}) {
    ModelConfig c = base;
    std::size_t prev = 0, delta = 0;
    for (int depth = 0; depth <= kMaxDepth; ++depth) {
      c.depth = depth;
      const std::size_t n = param_count(c);
      EXPECT_EQ(n, count_from_shapes(c));
      EXPECT_EQ(n, HighlightModel(c).param_count());
      if (depth > 0) {
        EXPECT_GT(n, prev);
        if (depth > 1) {
          EXPECT_EQ(n - prev, delta);
        }
        delta = n - prev;
      }
      prev = n;
    }
  }
}

TEST(ForwardRemixTest, IdentityAndZeroMask) {
  const HighlightModel model(toy_model_config(1));
  const AudioClip x = random_clip(4096, 3, 8000);
  const auto one = forward_remix(model, x, std::nullopt, ForwardHooks{.force_mask = 1.0});
  EXPECT_LT(rms_diff(one.audio.data(), x.data()), 1e-6);

  const auto zero = forward_remix(model, x, std::nullopt, ForwardHooks{.force_mask = 0.0});
  EXPECT_EQ(peak_abs(zero.audio.samples()), 0.0);

  const HighlightModel full{ModelConfig{}};
  const AudioClip y = random_clip(20000, 4, 44100);
  EXPECT_LT(rms_diff(forward_remix(full, y, std::nullopt, ForwardHooks{.force_mask = 1.0})
                         .audio.data(),
                     y.data()),
            1e-6);
}

// Peak bound: every frame's inverse DFT is bounded by the two-sided magnitude
// sum over N, and overlap-add divides sum |w| by sum w^2.
double output_bound(const AudioClip& x, const StftConfig& cfg, double mask_max) {
  const Spectrogram spec = stft(x, cfg);
  const int n = cfg.fft_len();
  double frame_bound = 0.0;
  for (Eigen::Index t = 0; t < spec.frames(); ++t) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < spec.num_bins(); ++k) {
      const bool edge = k == 0 || k == n / 2;
      s += (edge ? 1.0 : 2.0) * std::abs(spec.bins(t, k));
    }
    frame_bound = std::max(frame_bound, s / n);
  }
  const auto w = cfg.window_samples();
  double ratio = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long long m = static_cast<long long>(i) + spec.layout.pad_left;
    double s1 = 0.0, s2 = 0.0;
    for (int t = 0; t < spec.frames(); ++t) {
      const long long off = m - static_cast<long long>(t) * cfg.hop();
      if (off >= 0 && off < cfg.window_len()) {
        s1 += std::abs(w[off]);
        s2 += w[off] * w[off];
      }
    }
    ratio = std::max(ratio, s1 / s2);
  }
  return mask_max * frame_bound * ratio;
}

TEST(ForwardRemixTest, MaskBoundedAndOutputFinite) {
  const ModelConfig cfg = toy_model_config(2, 11);
  const HighlightModel model(cfg);
  for (double scale : {1e-6, 1.0, 1e4}) {
    const AudioClip x = random_clip(4096, 8, 8000).scaled(scale);
    EmbeddingVector e{random_samples(cfg.c_text, 9, scale), "t", Modality::kText};
    const auto r = forward_remix(model, x, e);
    EXPECT_GE(r.mask.minCoeff(), 0.0);
    EXPECT_LE(r.mask.maxCoeff(), cfg.mask_max);
    for (double v : r.audio.samples()) ASSERT_TRUE(std::isfinite(v));
    EXPECT_LE(peak_abs(r.audio.samples()), output_bound(x, cfg.stft, cfg.mask_max) * (1 + 1e-12));
  }
}

TEST(ForwardRemixTest, TextWidthAndNullToken) {
  const ModelConfig cfg = toy_model_config(1);
  HighlightModel model(cfg);
  const AudioClip x = random_clip(4096, 10, 8000);
  EXPECT_THROW(forward_remix(model, x, EmbeddingVector{{1.0, 2.0}, "t", Modality::kText}),
               ShapeError);
  const auto without = forward_remix(model, x, std::nullopt).mask;
  const auto with =
      forward_remix(model, x, EmbeddingVector{random_samples(cfg.c_text, 1), "t", Modality::kText})
          .mask;
  EXPECT_GT((without - with).cwiseAbs().maxCoeff(), 0.0);
  // The null token is a live parameter.
  const ParamGroup& null = model.group("text.null");
  model.params()[null.offset] += 0.5;
  EXPECT_GT((forward_remix(model, x, std::nullopt).mask - without).cwiseAbs().maxCoeff(), 0.0);
}

TEST(OracleMaskTest, ClosedForms) {
  const StftConfig cfg(256, 64, 256);
  const AudioClip x = random_clip(4096, 12, 8000);
  const Spectrogram sx = stft(x, cfg);
  const RealMatrix same = oracle_mask(sx, sx, 4.0);
  const RealMatrix mag_x = sx.magnitude();
  for (Eigen::Index i = 0; i < same.size(); ++i) {
    if (mag_x(i) > 1e-3) {
      EXPECT_NEAR(same(i), 1.0, 1e-4);
    }
  }
  const RealMatrix half = oracle_mask(sx, stft(x.scaled(0.5), cfg), 4.0);
  for (Eigen::Index i = 0; i < half.size(); ++i) {
    if (mag_x(i) > 1e-3) {
      EXPECT_NEAR(half(i), 0.5, 1e-4);
    }
  }
  EXPECT_LE(oracle_mask(sx, stft(x.scaled(10.0), cfg), 4.0).maxCoeff(), 4.0);
  EXPECT_THROW(oracle_mask(sx, stft(random_clip(3000, 1, 8000), cfg), 4.0), ShapeError);
}

TEST(OracleMaskTest, SamePhasePairsRecoverTarget) {
  const StftConfig cfg(256, 64, 256);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const StemSet stems = make_partial_stems(seed, cfg);
    const PoorMix poor = synthesize_poor_mix(stems, toy_degradation_prior(), seed,
                                             SynthOptions{.breakpoint_probability = 0.0});
    const AudioClip& target = stems.reference_mix();
    const RealMatrix m = oracle_mask(stft(poor.mix, cfg), stft(target, cfg), 4.0);
    EXPECT_LT(mag(apply_mask(poor.mix, m, cfg), target, cfg), 0.5);
    EXPECT_GT(mag(poor.mix, target, cfg), 10.0);
  }
}

TEST(LossTest, DefinitionalLinks) {
  const StftConfig cfg(256, 64, 256);
  const AudioClip a = random_clip(4096, 1, 8000), b = random_clip(4096, 2, 8000);
  EXPECT_EQ(loss_l1(a, a, cfg), 0.0);
  EXPECT_DOUBLE_EQ(loss_l1(a, b, cfg), mag(a, b, cfg) / 100.0);
  EXPECT_THROW(loss_l1(a, random_clip(4000, 3, 8000), cfg), ShapeError);

  double prev = loss_l1(a, b, cfg);
  for (double alpha : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    std::vector<double> mix(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mix[i] = (1 - alpha) * a[i] + alpha * b[i];
    const double l = loss_l1(AudioClip(mix, 8000), b, cfg);
    EXPECT_LT(l, prev);
    prev = l;
  }
  EXPECT_EQ(prev, 0.0);
}

TEST(LossTest, ForwardLossMatchesLossAndGrad) {
  const HighlightModel model(toy_model_config(1, 4));
  const auto clip = make_toy_dataset(ToyDataOptions{.clips = 1}, 4)[0];
  const TrainSample s = clip.sample();
  const double direct =
      loss_l1(forward_remix(model, s.input, s.text).audio, s.target, model.config().stft);
  EXPECT_DOUBLE_EQ(loss_and_grad(model, s).loss, direct);
}

TEST(GradCheckTest, LinearToy) {
  const HighlightModel model(tiny_config(0));
  const ForwardHooks hooks{.bypass_time_branch = true};
  for (bool text : {true, false}) {
    const GradCheckResult r = grad_check(model, tiny_sample(1, text), 1e-5, hooks);
    EXPECT_LT(r.max_rel_error, 1e-7) << r.worst_group;
  }
}

TEST(GradCheckTest, FullToyDepthTwo) {
  const HighlightModel model(tiny_config(2));
  const GradCheckResult r = grad_check(model, tiny_sample(2), 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_group;
  // Every group other than the structurally inert ones carries gradient.
  for (const auto& g : r.groups) {
    if (g.name == "text.null" || g.name.find("attn.bk") != std::string::npos) continue;
    EXPECT_GT(g.analytic_norm, 0.0) << g.name;
  }
}

TEST(GradCheckTest, ZeroInputSilencesInputConv) {
  const HighlightModel model(tiny_config(2));
  TrainSample s = tiny_sample(3);
  s.input = AudioClip(std::vector<double>(24, 0.0), 8000);
  const LossGrad lg = loss_and_grad(model, s);
  const ParamGroup& g = model.group("time.conv0.weight");
  for (std::size_t i = g.offset; i < g.offset + g.size(); ++i) EXPECT_EQ(lg.grad[i], 0.0);
}

TEST(GradCheckTest, NonFiniteGradientNamesGroup) {
  HighlightModel model(tiny_config(1));
  model.params()[model.group("mask.weight").offset] = std::nan("");
  EXPECT_THROW(grad_check(model, tiny_sample(4)), NumericError);
}

class TrainTest : public ::testing::Test {
 protected:
  static std::vector<TrainSample> samples(int n, std::uint64_t seed) {
    std::vector<TrainSample> out;
    for (const auto& c : make_toy_dataset(ToyDataOptions{.clips = n}, seed)) {
      out.push_back(c.sample());
    }
    return out;
  }
};

TEST_F(TrainTest, ZeroLearningRateKeepsTraceFlat) {
  HighlightModel model(toy_model_config(1, 2));
  const auto before = model.params();
  TrainConfig t = toy_train_config(3);
  t.learning_rate = 0.0;
  t.epochs = 3;
  const TrainTrace trace = train_toy(model, samples(4, 1), t);
  EXPECT_EQ(model.params(), before);
  for (double l : trace.epoch_loss) EXPECT_EQ(l, trace.initial_loss);
  EXPECT_EQ(trace.final_loss, trace.initial_loss);
}

TEST_F(TrainTest, SeedDeterminesTrace) {
  const auto data = samples(4, 2);
  TrainConfig t = toy_train_config(8);
  t.epochs = 3;
  t.batch_size = 2;
  HighlightModel a(toy_model_config(1, 1)), b(toy_model_config(1, 1));
  EXPECT_EQ(train_toy(a, data, t), train_toy(b, data, t));
  EXPECT_EQ(a.params(), b.params());
}

TEST_F(TrainTest, LossDecreases) {
  HighlightModel model(toy_model_config(1, 3));
  TrainConfig t = toy_train_config(3);
  t.epochs = 10;
  const TrainTrace trace = train_toy(model, samples(6, 3), t);
  EXPECT_LT(trace.final_loss, trace.initial_loss);
  EXPECT_LT(trace.epoch_loss.back(), trace.epoch_loss.front());
}

TEST_F(TrainTest, NanAbortsWithPosition) {
  HighlightModel model(toy_model_config(0, 3));
  const auto data = samples(3, 4);
  TrainConfig t = toy_train_config(3);
  t.epochs = 2;
  // Finite weights that overflow the frequency branch on the first update.
  t.learning_rate = 1e300;
  try {
    train_toy(model, data, t);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos) << e.what();
  }
}

TEST_F(TrainTest, InvalidConfigRejected) {
  HighlightModel model(toy_model_config(0));
  TrainConfig t;
  t.epochs = 0;
  EXPECT_THROW(train_toy(model, samples(1, 1), t), ConfigError);
  t = {};
  t.learning_rate = -1.0;
  EXPECT_THROW(t.validate(), ConfigError);
  EXPECT_THROW(train_toy(model, {}, TrainConfig{}), DataError);
  EXPECT_EQ(train_config_from_json(to_json(toy_train_config(4))).seed, 4u);
}

TEST_F(TrainTest, ConditioningIsLive) {
  const auto clips = make_toy_dataset(ToyDataOptions{.clips = 6}, 5);
  std::vector<TrainSample> data;
  for (const auto& c : clips) data.push_back(c.sample());
  HighlightModel model(toy_model_config(1, 5));
  TrainConfig t = toy_train_config(5);
  t.epochs = 5;
  train_toy(model, data, t);
  const auto own = forward_remix(model, clips[0].poor.mix, clips[0].text).mask;
  const auto swapped = forward_remix(model, clips[0].poor.mix, clips[1].text).mask;
  EXPECT_GT((own - swapped).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SweepTest, RowsAndParamCounts) {
  const auto clips = to_eval_clips(make_toy_dataset(ToyDataOptions{.clips = 2}, 6));
  TrainConfig t = toy_train_config(6);
  t.epochs = 1;
  const EvalOptions opts{.stft = StftConfig(256, 64, 256)};
  const auto one = depth_sweep(clips, clips, {0}, toy_model_config(0), t, opts);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].depth, 0);

  const auto rows = depth_sweep(clips, clips, {0, 1, 2}, toy_model_config(0), t, opts, 2);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].depth, static_cast<int>(i));
    if (i) EXPECT_GT(rows[i].param_count, rows[i - 1].param_count);
    EXPECT_GT(rows[i].input_train_mag, 0.0);
    EXPECT_TRUE(std::isfinite(rows[i].w_dis));
  }
  // Parallel runs reproduce the serial row.
  EXPECT_EQ(rows[0].mag, one[0].mag);
  const std::string csv = sweep_to_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_THROW(depth_sweep(clips, clips, {}, toy_model_config(0), t, opts), ConfigError);
  EXPECT_THROW(depth_sweep(clips, clips, {7}, toy_model_config(0), t, opts), ConfigError);
}

TEST(CheckpointTest, RoundTripAndCorruption) {
  const auto dir = std::filesystem::temp_directory_path() / "semmix_ckpt_test";
  std::filesystem::create_directories(dir);
  const HighlightModel model(toy_model_config(2, 42));
  const auto path = dir / "m.ckpt";
  save_checkpoint(path, model, {{"train", to_json(toy_train_config())}});
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.model.config(), model.config());
  ASSERT_EQ(back.model.param_count(), model.param_count());
  for (std::size_t i = 0; i < model.param_count(); ++i) {
    ASSERT_EQ(back.model.params()[i], static_cast<double>(static_cast<float>(model.params()[i])));
  }
  EXPECT_EQ(back.header.at("param_count").get<std::size_t>(), model.param_count());
  EXPECT_EQ(back.header.at("seed").get<std::uint64_t>(), 42u);
  EXPECT_EQ(back.header.at("train").at("optimizer"), "adam");
  EXPECT_EQ(std::filesystem::file_size(path) % 4, (16 + back.header.dump().size()) % 4);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(load_checkpoint(path), DataError);
  save_checkpoint(path, model);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 2);
  EXPECT_THROW(load_checkpoint(path), DataError);
  std::filesystem::remove_all(dir);
}

TEST(ToyDataTest, DeterministicAndEncoded) {
  const auto a = make_toy_dataset(ToyDataOptions{.clips = 3}, 9);
  const auto b = make_toy_dataset(ToyDataOptions{.clips = 3}, 9);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].poor.mix.data(), b[i].poor.mix.data());
    EXPECT_EQ(a[i].text.values, b[i].text.values);
    EXPECT_EQ(a[i].text.values.size(), 64u);
    EXPECT_GE(a[i].offsets_db[0], -12.0 - 1e-9);
    EXPECT_LE(a[i].offsets_db[0], -6.0 + 1e-9);
    EXPECT_GE(a[i].offsets_db[1], 3.0 - 1e-9);
    // Static degradation: one breakpoint per stem.
    for (const auto& c : a[i].poor.schedule.curves) EXPECT_EQ(c.points.size(), 1u);
  }
  EXPECT_NE(a[0].poor.mix.data(), a[1].poor.mix.data());
}

TEST(ParallelTest, LowestIndexErrorWins) {
  std::vector<int> hits(20, 0);
  try {
    parallel_for(20, 4, [&](std::size_t i) {
      hits[i] = 1;
      if (i == 7 || i == 13) throw DataError("index " + std::to_string(i));
    });
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "index 7");
  }
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 20);
}

}  // namespace
}  // namespace semmix
