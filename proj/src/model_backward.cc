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

#include "model_internal.h"
#include "semmix/error.h"
#include "semmix/model.h"

namespace semmix {
namespace detail {
namespace {

// Returns dL/dx; adds into the gamma/beta gradients.
RealMatrix layer_norm_backward(const RealMatrix& dy, const LnCache& c, ConstMap gamma,
                               MutMap dgamma, MutMap dbeta) {
  dgamma.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbeta.row(0) += dy.colwise().sum();
  const RealMatrix dxhat = dy.array().rowwise() * gamma.row(0).array();
  RealMatrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double m1 = dxhat.row(r).mean();
    const double m2 = (dxhat.row(r).array() * c.xhat.row(r).array()).mean();
    dx.row(r) = c.rstd(r) * (dxhat.row(r).array() - m1 - c.xhat.row(r).array() * m2);
  }
  return dx;
}

double gelu_grad(double x) {
  constexpr double c = 0.7978845608028654;
  constexpr double a = 0.044715;
  const double t = std::tanh(c * (x + a * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * a * x * x);
}

// Adds x^T dy into the weight gradient and column sums of dy into the bias.
void linear_backward(const RealMatrix& x, const RealMatrix& dy, MutMap dw, MutMap db) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
}

RealMatrix block_backward(const RealMatrix& dout, const BlockSlots& s,
                          const std::vector<double>& p, std::vector<double>& g, int heads,
                          const BlockCache& c) {
  const Eigen::Index d = dout.cols();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  linear_backward(c.g, dout, view(g, s.w2), view(g, s.b2));
  const RealMatrix dh_pre =
      (dout * view(p, s.w2).transpose()).array() * c.hpre.unaryExpr(&gelu_grad).array();
  linear_backward(c.b, dh_pre, view(g, s.w1), view(g, s.b1));
  const RealMatrix db = dh_pre * view(p, s.w1).transpose();
  const RealMatrix dmid = dout + layer_norm_backward(db, c.ln2, view(p, s.ln2_g),
                                                     view(g, s.ln2_g), view(g, s.ln2_b));

  linear_backward(c.o, dmid, view(g, s.wo), view(g, s.bo));
  const RealMatrix dout_att = dmid * view(p, s.wo).transpose();
  RealMatrix dq(c.q.rows(), d), dk(c.k.rows(), d), dv(c.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const RealMatrix& att = c.att[h];
    const auto doh = dout_att.middleCols(h * dh, dh);
    const RealMatrix datt = doh * c.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh) = att.transpose() * doh;
    const Eigen::VectorXd rowdot = (datt.array() * att.array()).rowwise().sum();
    const RealMatrix dsc = att.array() * (datt.colwise() - rowdot).array();
    dq.middleCols(h * dh, dh) = dsc * c.k.middleCols(h * dh, dh) * scale;
    dk.middleCols(h * dh, dh) = dsc.transpose() * c.q.middleCols(h * dh, dh) * scale;
  }
  linear_backward(c.a, dq, view(g, s.wq), view(g, s.bq));
  linear_backward(c.a, dk, view(g, s.wk), view(g, s.bk));
  linear_backward(c.a, dv, view(g, s.wv), view(g, s.bv));
  const RealMatrix da = dq * view(p, s.wq).transpose() + dk * view(p, s.wk).transpose() +
                        dv * view(p, s.wv).transpose();
  return dmid + layer_norm_backward(da, c.ln1, view(p, s.ln1_g), view(g, s.ln1_g),
                                    view(g, s.ln1_b));
}

}  // namespace

void backward_network(const HighlightModel& model, const ModelSlots& slots,
                      const ForwardCache& c, const ForwardHooks& hooks,
                      const RealMatrix& dmask, std::vector<double>* grad) {
  if (c.forced) return;
  const ModelConfig& cfg = model.config();
  const std::vector<double>& p = model.params();
  std::vector<double>& g = *grad;
  const Eigen::Index frames = dmask.rows();

  const RealMatrix dlogits =
      dmask.array() * cfg.mask_max * c.sig.array() * (1.0 - c.sig.array());
  linear_backward(c.normed, dlogits, view(g, slots.mask_w), view(g, slots.mask_b));
  const RealMatrix dnormed = dlogits * view(p, slots.mask_w).transpose();
  const RealMatrix dx = layer_norm_backward(dnormed, c.lnf, view(p, slots.lnf_g),
                                            view(g, slots.lnf_g), view(g, slots.lnf_b));

  RealMatrix du;
  Eigen::RowVectorXd dctx;
  if (cfg.depth == 0) {
    du = dx;
    dctx = dx.colwise().sum();
  } else {
    RealMatrix dseq = RealMatrix::Zero(frames + 1, cfg.d_model);
    dseq.bottomRows(frames) = dx;
    for (int b = cfg.depth - 1; b >= 0; --b) {
      dseq = block_backward(dseq, slots.blocks[b], p, g, cfg.n_heads, c.blocks[b]);
    }
    dctx = dseq.row(0);
    du = dseq.bottomRows(frames);
  }
  if (c.text) {
    view(g, slots.text_w).noalias() += c.text->transpose() * dctx;
    view(g, slots.text_b).row(0) += dctx;
  } else {
    view(g, slots.text_null).row(0) += dctx;
  }

  linear_backward(c.logmag, du, view(g, slots.freq_w), view(g, slots.freq_b));
  if (hooks.bypass_time_branch) return;

  view(g, slots.time_proj).noalias() += c.pooled.transpose() * du;
  const RealMatrix dpooled = du * view(p, slots.time_proj).transpose();
  RealMatrix dz = RealMatrix::Zero(c.conv_out.back().rows(), c.conv_out.back().cols());
  for (Eigen::Index t = 0; t < frames; ++t) dz.col(c.pool_idx[t]) += dpooled.row(t).transpose();

  for (std::size_t l = c.conv_out.size(); l-- > 0;) {
    const RealMatrix dpre = dz.array() * (1.0 - c.conv_out[l].array().square());
    view(g, slots.conv_w[l]).noalias() += dpre * c.conv_cols[l].transpose();
    view(g, slots.conv_b[l]).row(0) += dpre.rowwise().sum().transpose();
    if (l == 0) break;
    const RealMatrix dcols = view(p, slots.conv_w[l]).transpose() * dpre;
    const Eigen::Index k = cfg.time_kernels[l];
    const Eigen::Index s = cfg.time_strides[l];
    const RealMatrix& in = c.conv_out[l - 1];
    dz = RealMatrix::Zero(in.rows(), in.cols());
    for (Eigen::Index ch = 0; ch < in.rows(); ++ch) {
      for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < dcols.cols(); ++i) dz(ch, i * s + j) += dcols(ch * k + j, i);
      }
    }
  }
}

}  // namespace detail

LossGrad loss_and_grad(const HighlightModel& model, const TrainSample& sample,
                       const ForwardHooks& hooks) {
  require_same_shape(sample.input, sample.target, "loss_and_grad");
  const StftConfig& cfg = model.config().stft;
  const detail::ModelSlots slots = detail::build_slots(model.config(), nullptr);
  detail::ForwardCache cache;
  detail::forward_network(model, slots, sample.input, sample.text, hooks, &cache);

  Spectrogram masked = cache.spec;
  masked.bins = cache.spec.bins.array() * cache.mask.cast<Complex>().array();
  const AudioClip pred = istft(masked);
  const ComplexMatrix y = stft(pred, cfg).bins;
  const RealMatrix r = stft(sample.target, cfg).magnitude();

  const RealMatrix ym = y.cwiseAbs();
  const double cells = static_cast<double>(y.size());
  LossGrad out;
  out.loss = (ym - r).cwiseAbs().mean();
  if (!std::isfinite(out.loss)) throw NumericError("loss is not finite");
  ComplexMatrix gy(y.rows(), y.cols());
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
      const double diff = ym(t, k) - r(t, k);
      const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      gy(t, k) = ym(t, k) > 0.0 ? y(t, k) * (sgn / (ym(t, k) * cells)) : Complex(0.0, 0.0);
    }
  }

  out.grad.assign(model.param_count(), 0.0);
  if (cache.forced) return out;
  const std::vector<double> gpred = stft_adjoint(gy, cfg, pred.size());
  const ComplexMatrix gmasked = istft_adjoint(gpred, cfg, pred.size());
  const RealMatrix dmask = (gmasked.array() * cache.spec.bins.array().conjugate()).real();
  detail::backward_network(model, slots, cache, hooks, dmask, &out.grad);
  return out;
}

GradCheckResult grad_check(const HighlightModel& model, const TrainSample& sample,
                           double epsilon, const ForwardHooks& hooks, double zero_floor) {
  const LossGrad analytic = loss_and_grad(model, sample, hooks);
  HighlightModel probe = model;
  auto loss_at = [&](std::size_t i, double value) {
    probe.params()[i] = value;
    return loss_l1(forward_remix(probe, sample.input, sample.text, hooks).audio, sample.target,
                   model.config().stft);
  };
  double total2 = 0.0;
  for (double a : analytic.grad) total2 += a * a;
  const double floor = zero_floor * std::sqrt(total2);
  GradCheckResult result;
  for (const ParamGroup& group : model.groups()) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = group.offset; i < group.offset + group.size(); ++i) {
      const double a = analytic.grad[i];
      if (!std::isfinite(a)) throw NumericError("non-finite gradient in " + group.name);
      const double orig = model.params()[i];
      const double numeric =
          (loss_at(i, orig + epsilon) - loss_at(i, orig - epsilon)) / (2.0 * epsilon);
      probe.params()[i] = orig;
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double denom = std::max(std::sqrt(a2) + std::sqrt(n2), floor);
    const double rel = denom > 0.0 ? std::sqrt(diff2) / denom : 0.0;
    result.groups.push_back({group.name, rel, std::sqrt(a2), std::sqrt(n2)});
    if (result.worst_group.empty() || rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_group = group.name;
    }
  }
  return result;
}

}  // namespace semmix
