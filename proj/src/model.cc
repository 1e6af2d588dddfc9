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


#include "semmix/model.h"

#include <cmath>
#include <numbers>

#include "model_internal.h"
#include "semmix/error.h"
#include "semmix/random.h"

namespace semmix {
namespace detail {
namespace {

RealMatrix layer_norm(const RealMatrix& x, ConstMap gamma, ConstMap beta, LnCache* cache) {
  const Eigen::Index d = x.cols();
  cache->xhat.resize(x.rows(), d);
  cache->rstd.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    cache->rstd(r) = rstd;
    cache->xhat.row(r) = (x.row(r).array() - mu) * rstd;
  }
  RealMatrix y = cache->xhat.array().rowwise() * gamma.row(0).array();
  y.rowwise() += beta.row(0);
  return y;
}

double gelu(double x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2 / pi)
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

void softmax_rows(RealMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

RealMatrix block_forward(const RealMatrix& x, const BlockSlots& s, const std::vector<double>& p,
                         int heads, BlockCache* c) {
  const Eigen::Index d = x.cols();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  c->a = layer_norm(x, view(p, s.ln1_g), view(p, s.ln1_b), &c->ln1);
  c->q = c->a * view(p, s.wq);
  c->q.rowwise() += view(p, s.bq).row(0);
  c->k = c->a * view(p, s.wk);
  c->k.rowwise() += view(p, s.bk).row(0);
  c->v = c->a * view(p, s.wv);
  c->v.rowwise() += view(p, s.bv).row(0);
  c->o.resize(x.rows(), d);
  c->att.resize(heads);
  for (int h = 0; h < heads; ++h) {
    RealMatrix sc = c->q.middleCols(h * dh, dh) * c->k.middleCols(h * dh, dh).transpose() * scale;
    softmax_rows(sc);
    c->o.middleCols(h * dh, dh) = sc * c->v.middleCols(h * dh, dh);
    c->att[h] = std::move(sc);
  }
  RealMatrix mid = x + c->o * view(p, s.wo);
  mid.rowwise() += view(p, s.bo).row(0);

  c->b = layer_norm(mid, view(p, s.ln2_g), view(p, s.ln2_b), &c->ln2);
  c->hpre = c->b * view(p, s.w1);
  c->hpre.rowwise() += view(p, s.b1).row(0);
  c->g = c->hpre.unaryExpr(&gelu);
  RealMatrix out = mid + c->g * view(p, s.w2);
  out.rowwise() += view(p, s.b2).row(0);
  return out;
}

}  // namespace

ModelSlots build_slots(const ModelConfig& cfg, std::vector<ParamGroup>* groups) {
  ModelSlots slots;
  std::size_t offset = 0;
  auto add = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    Slot s{offset, rows, cols};
    if (groups) groups->push_back({name, offset, rows, cols});
    offset += rows * cols;
    return s;
  };
  const std::size_t d = cfg.d_model;
  const std::size_t f = cfg.frequency_bins();
  const std::size_t hidden = static_cast<std::size_t>(cfg.ffn_mult) * d;
  std::size_t cin = 1;
  for (std::size_t l = 0; l < cfg.time_channels.size(); ++l) {
    const std::size_t cout = cfg.time_channels[l];
    const std::string prefix = "time.conv" + std::to_string(l);
    slots.conv_w.push_back(add(prefix + ".weight", cout, cin * cfg.time_kernels[l]));
    slots.conv_b.push_back(add(prefix + ".bias", 1, cout));
    cin = cout;
  }
  slots.time_proj = add("time.proj", cin, d);
  slots.freq_w = add("freq.weight", f, d);
  slots.freq_b = add("freq.bias", 1, d);
  slots.text_w = add("text.weight", cfg.c_text, d);
  slots.text_b = add("text.bias", 1, d);
  slots.text_null = add("text.null", 1, d);
  for (int b = 0; b < cfg.depth; ++b) {
    const std::string prefix = "block" + std::to_string(b);
    BlockSlots s;
    s.ln1_g = add(prefix + ".ln1.gamma", 1, d);
    s.ln1_b = add(prefix + ".ln1.beta", 1, d);
    s.wq = add(prefix + ".attn.wq", d, d);
    s.bq = add(prefix + ".attn.bq", 1, d);
    s.wk = add(prefix + ".attn.wk", d, d);
    s.bk = add(prefix + ".attn.bk", 1, d);
    s.wv = add(prefix + ".attn.wv", d, d);
    s.bv = add(prefix + ".attn.bv", 1, d);
    s.wo = add(prefix + ".attn.wo", d, d);
    s.bo = add(prefix + ".attn.bo", 1, d);
    s.ln2_g = add(prefix + ".ln2.gamma", 1, d);
    s.ln2_b = add(prefix + ".ln2.beta", 1, d);
    s.w1 = add(prefix + ".ffn.w1", d, hidden);
    s.b1 = add(prefix + ".ffn.b1", 1, hidden);
    s.w2 = add(prefix + ".ffn.w2", hidden, d);
    s.b2 = add(prefix + ".ffn.b2", 1, d);
    slots.blocks.push_back(s);
  }
  slots.lnf_g = add("final_ln.gamma", 1, d);
  slots.lnf_b = add("final_ln.beta", 1, d);
  slots.mask_w = add("mask.weight", d, f);
  slots.mask_b = add("mask.bias", 1, f);
  return slots;
}

void forward_network(const HighlightModel& model, const ModelSlots& slots,
                     const AudioClip& clip, const std::optional<EmbeddingVector>& text,
                     const ForwardHooks& hooks, ForwardCache* c) {
  const ModelConfig& cfg = model.config();
  const std::vector<double>& p = model.params();
  c->spec = stft(clip, cfg.stft);
  const Eigen::Index frames = c->spec.frames();
  const Eigen::Index bins = c->spec.num_bins();
  if (text && static_cast<int>(text->values.size()) != cfg.c_text) {
    throw ShapeError("text embedding has width " + std::to_string(text->values.size()) +
                     ", model expects " + std::to_string(cfg.c_text));
  }
  if (hooks.force_mask) {
    c->forced = true;
    c->mask = RealMatrix::Constant(frames, bins, *hooks.force_mask);
    return;
  }
  c->forced = false;
  c->logmag = c->spec.magnitude().array().log1p();
  RealMatrix u = c->logmag * view(p, slots.freq_w);
  u.rowwise() += view(p, slots.freq_b).row(0);

  c->conv_cols.clear();
  c->conv_out.clear();
  if (!hooks.bypass_time_branch) {
    const FrameLayout& layout = c->spec.layout;
    RealMatrix z = RealMatrix::Zero(1, layout.pad_left + clip.size() + layout.pad_right);
    for (std::size_t i = 0; i < clip.size(); ++i) z(0, layout.pad_left + i) = clip[i];
    for (std::size_t l = 0; l < cfg.time_channels.size(); ++l) {
      const Eigen::Index k = cfg.time_kernels[l];
      const Eigen::Index s = cfg.time_strides[l];
      const Eigen::Index cin = z.rows();
      if (z.cols() < k) throw ShapeError("clip too short for the time branch");
      const Eigen::Index len = (z.cols() - k) / s + 1;
      RealMatrix cols(cin * k, len);
      for (Eigen::Index ch = 0; ch < cin; ++ch) {
        for (Eigen::Index j = 0; j < k; ++j) {
          for (Eigen::Index i = 0; i < len; ++i) cols(ch * k + j, i) = z(ch, i * s + j);
        }
      }
      RealMatrix pre = view(p, slots.conv_w[l]) * cols;
      pre.colwise() += view(p, slots.conv_b[l]).row(0).transpose();
      z = pre.array().tanh();
      c->conv_cols.push_back(std::move(cols));
      c->conv_out.push_back(z);
    }
    const double stride = cfg.time_stride();
    const double shift = (cfg.stft.window_len() - cfg.time_receptive_field()) / 2.0;
    c->pool_idx.resize(frames);
    c->pooled.resize(frames, z.rows());
    for (Eigen::Index t = 0; t < frames; ++t) {
      const double pos = (static_cast<double>(t) * cfg.stft.hop() + shift) / stride;
      const Eigen::Index j =
          std::clamp<Eigen::Index>(std::llround(pos), 0, z.cols() - 1);
      c->pool_idx[t] = j;
      c->pooled.row(t) = z.col(j).transpose();
    }
    u += c->pooled * view(p, slots.time_proj);
  }

  Eigen::RowVectorXd ctx;
  if (text) {
    c->text = Eigen::Map<const Eigen::RowVectorXd>(text->values.data(), cfg.c_text);
    ctx = *c->text * view(p, slots.text_w);
    ctx += view(p, slots.text_b).row(0);
  } else {
    c->text.reset();
    ctx = view(p, slots.text_null).row(0);
  }

  RealMatrix x;
  c->blocks.resize(cfg.depth);
  if (cfg.depth == 0) {
    x = u;
    x.rowwise() += ctx;
  } else {
    RealMatrix seq(frames + 1, cfg.d_model);
    seq.row(0) = ctx;
    seq.bottomRows(frames) = u;
    for (int b = 0; b < cfg.depth; ++b) {
      seq = block_forward(seq, slots.blocks[b], p, cfg.n_heads, &c->blocks[b]);
    }
    x = seq.bottomRows(frames);
  }
  c->normed = layer_norm(x, view(p, slots.lnf_g), view(p, slots.lnf_b), &c->lnf);
  RealMatrix logits = c->normed * view(p, slots.mask_w);
  logits.rowwise() += view(p, slots.mask_b).row(0);
  c->sig = (1.0 + (-logits.array()).exp()).inverse();
  c->mask = cfg.mask_max * c->sig;
}

}  // namespace detail

void ModelConfig::validate() const {
  if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
    throw ConfigError("d_model must be a positive multiple of n_heads");
  }
  if (depth < 0 || depth > kMaxDepth) {
    throw ConfigError("depth must lie in [0, " + std::to_string(kMaxDepth) + "]");
  }
  if (c_text < 1) throw ConfigError("c_text must be at least 1");
  if (ffn_mult < 1) throw ConfigError("ffn_mult must be at least 1");
  if (!(mask_max > 0.0) || !std::isfinite(mask_max)) throw ConfigError("mask_max must be > 0");
  if (time_channels.empty() || time_channels.size() != time_kernels.size() ||
      time_channels.size() != time_strides.size()) {
    throw ConfigError("time branch lists must be non-empty and of equal length");
  }
  for (std::size_t l = 0; l < time_channels.size(); ++l) {
    if (time_channels[l] < 1 || time_kernels[l] < 1 || time_strides[l] < 1) {
      throw ConfigError("time branch channels, kernels and strides must be positive");
    }
  }
}

int ModelConfig::time_stride() const {
  int s = 1;
  for (int v : time_strides) s *= v;
  return s;
}

int ModelConfig::time_receptive_field() const {
  int r = 1, jump = 1;
  for (std::size_t l = 0; l < time_kernels.size(); ++l) {
    r += (time_kernels[l] - 1) * jump;
    jump *= time_strides[l];
  }
  return r;
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {{"d_model", cfg.d_model},
          {"n_heads", cfg.n_heads},
          {"depth", cfg.depth},
          {"c_text", cfg.c_text},
          {"ffn_mult", cfg.ffn_mult},
          {"time_channels", cfg.time_channels},
          {"time_kernels", cfg.time_kernels},
          {"time_strides", cfg.time_strides},
          {"mask_max", cfg.mask_max},
          {"seed", cfg.seed},
          {"stft",
           {{"window_len", cfg.stft.window_len()},
            {"hop", cfg.stft.hop()},
            {"fft_len", cfg.stft.fft_len()},
            {"window", to_string(cfg.stft.window())},
            {"padding", to_string(cfg.stft.padding())}}}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  try {
    cfg.d_model = j.at("d_model").get<int>();
    cfg.n_heads = j.at("n_heads").get<int>();
    cfg.depth = j.at("depth").get<int>();
    cfg.c_text = j.at("c_text").get<int>();
    cfg.ffn_mult = j.at("ffn_mult").get<int>();
    cfg.time_channels = j.at("time_channels").get<std::vector<int>>();
    cfg.time_kernels = j.at("time_kernels").get<std::vector<int>>();
    cfg.time_strides = j.at("time_strides").get<std::vector<int>>();
    cfg.mask_max = j.at("mask_max").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    const auto& s = j.at("stft");
    cfg.stft = StftConfig(s.at("window_len").get<int>(), s.at("hop").get<int>(),
                          s.at("fft_len").get<int>(),
                          window_type_from_string(s.at("window").get<std::string>()),
                          pad_mode_from_string(s.at("padding").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

HighlightModel::HighlightModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const detail::ModelSlots slots = detail::build_slots(cfg_, &groups_);
  const ParamGroup& last = groups_.back();
  params_.assign(last.offset + last.size(), 0.0);

  Rng rng(cfg_.seed);
  auto init_uniform = [&](const detail::Slot& s, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    auto m = detail::view(params_, s);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = uniform(rng, -bound, bound);
    }
  };
  auto init_ones = [&](const detail::Slot& s) { detail::view(params_, s).setOnes(); };

  for (std::size_t l = 0; l < slots.conv_w.size(); ++l) {
    init_uniform(slots.conv_w[l], slots.conv_w[l].cols);
  }
  init_uniform(slots.time_proj, slots.time_proj.rows);
  init_uniform(slots.freq_w, slots.freq_w.rows);
  init_uniform(slots.text_w, slots.text_w.rows);
  init_uniform(slots.text_null, cfg_.d_model);
  for (const auto& b : slots.blocks) {
    init_ones(b.ln1_g);
    init_ones(b.ln2_g);
    for (const auto* s : {&b.wq, &b.wk, &b.wv, &b.wo, &b.w1}) init_uniform(*s, s->rows);
    init_uniform(b.w2, b.w2.rows);
  }
  init_ones(slots.lnf_g);
  init_uniform(slots.mask_w, slots.mask_w.rows);
}

const ParamGroup& HighlightModel::group(const std::string& name) const {
  for (const auto& g : groups_) {
    if (g.name == name) return g;
  }
  throw ConfigError("no parameter group named '" + name + "'");
}

std::size_t param_count(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<ParamGroup> groups;
  detail::build_slots(cfg, &groups);
  return groups.back().offset + groups.back().size();
}

RemixResult forward_remix(const HighlightModel& model, const AudioClip& poor_mix,
                          const std::optional<EmbeddingVector>& text, const ForwardHooks& hooks) {
  const detail::ModelSlots slots = detail::build_slots(model.config(), nullptr);
  detail::ForwardCache cache;
  detail::forward_network(model, slots, poor_mix, text, hooks, &cache);
  Spectrogram masked = cache.spec;
  masked.bins = cache.spec.bins.array() * cache.mask.cast<Complex>().array();
  return {istft(masked).with_id(poor_mix.id()), std::move(cache.mask)};
}

AudioClip apply_mask(const AudioClip& clip, const RealMatrix& mask, const StftConfig& cfg) {
  Spectrogram spec = stft(clip, cfg);
  if (spec.bins.rows() != mask.rows() || spec.bins.cols() != mask.cols()) {
    throw ShapeError("apply_mask: mask shape does not match the clip's STFT");
  }
  spec.bins = spec.bins.array() * mask.cast<Complex>().array();
  return istft(spec).with_id(clip.id());
}

RealMatrix oracle_mask(const Spectrogram& poor, const Spectrogram& target, double mask_max) {
  if (poor.bins.rows() != target.bins.rows() || poor.bins.cols() != target.bins.cols()) {
    throw ShapeError("oracle_mask: spectrogram shapes differ");
  }
  if (!(mask_max > 0.0)) throw ConfigError("oracle_mask: mask_max must be > 0");
  const RealMatrix ratio =
      target.magnitude().array() / (poor.magnitude().array() + 1e-8);
  return ratio.cwiseMax(0.0).cwiseMin(mask_max);
}

double loss_l1(const AudioClip& pred, const AudioClip& target, const StftConfig& cfg) {
  require_same_shape(pred, target, "loss_l1");
  const RealMatrix p = stft(pred, cfg).magnitude();
  const RealMatrix t = stft(target, cfg).magnitude();
  return (p - t).cwiseAbs().mean();
}

}  // namespace semmix
