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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semmix/dsp.h"
#include "semmix/error.h"
#include "semmix/fft.h"

namespace semmix {

std::string to_string(WindowType w) {
  switch (w) {
    case WindowType::kHann: return "hann";
    case WindowType::kHamming: return "hamming";
    case WindowType::kRectangular: return "rectangular";
  }
  return "unknown";
}

std::string to_string(PadMode p) {
  return p == PadMode::kEdge ? "edge" : "none";
}

WindowType window_type_from_string(const std::string& s) {
  for (WindowType w : {WindowType::kHann, WindowType::kHamming, WindowType::kRectangular}) {
    if (to_string(w) == s) return w;
  }
  throw ConfigError("unknown window '" + s + "'");
}

PadMode pad_mode_from_string(const std::string& s) {
  if (s == "edge") return PadMode::kEdge;
  if (s == "none") return PadMode::kNone;
  throw ConfigError("unknown padding '" + s + "'");
}

namespace {

std::vector<double> make_window(WindowType type, int n) {
  std::vector<double> w(n, 1.0);
  const double step = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) {
    switch (type) {
      case WindowType::kHann: w[i] = 0.5 - 0.5 * std::cos(step * i); break;
      case WindowType::kHamming: w[i] = 0.54 - 0.46 * std::cos(step * i); break;
      case WindowType::kRectangular: break;
    }
  }
  return w;
}

// Sum of hop-shifted windows must be flat.
bool satisfies_cola(const std::vector<double>& w, int hop) {
  const int n = static_cast<int>(w.size());
  std::vector<double> acc(hop, 0.0);
  for (int i = 0; i < n; ++i) acc[i % hop] += w[i];
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  return *lo > 0.0 && (*hi - *lo) <= 1e-9 * *hi;
}

// Accumulated squared window over the padded signal.
std::vector<double> wola_denominator(const std::vector<double>& w,
                                     const FrameLayout& layout, int hop) {
  const std::size_t padded =
      static_cast<std::size_t>(layout.frames - 1) * hop + w.size();
  std::vector<double> den(padded, 0.0);
  for (int t = 0; t < layout.frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * hop;
    for (std::size_t n = 0; n < w.size(); ++n) den[off + n] += w[n] * w[n];
  }
  return den;
}

}  // namespace

StftConfig::StftConfig(int window_len, int hop, int fft_len, WindowType window,
                       PadMode padding)
    : window_len_(window_len),
      hop_(hop),
      fft_len_(fft_len),
      window_(window),
      padding_(padding) {
  if (!(hop > 0 && hop <= window_len && window_len <= fft_len)) {
    throw ConfigError("StftConfig: require 0 < hop <= window_len <= fft_len (got hop=" +
                      std::to_string(hop) + ", window_len=" +
                      std::to_string(window_len) + ", fft_len=" +
                      std::to_string(fft_len) + ")");
  }
  if (fft_len % 2 != 0) throw ConfigError("StftConfig: fft_len must be even");
  if (!satisfies_cola(window_samples(), hop)) {
    throw ConfigError("StftConfig: " + to_string(window) + " window of " +
                      std::to_string(window_len) + " samples with hop " +
                      std::to_string(hop) + " violates constant overlap-add");
  }
}

std::vector<double> StftConfig::window_samples() const {
  return make_window(window_, window_len_);
}

FrameLayout FrameLayout::compute(const StftConfig& cfg, std::size_t origin_len) {
  const auto n = static_cast<long long>(origin_len);
  const int w = cfg.window_len();
  const int h = cfg.hop();
  FrameLayout layout;
  if (cfg.padding() == PadMode::kEdge) {
    layout.pad_left = w - h;
    const long long base = n + 2LL * (w - h) - w;
    const long long extra = (h - base % h) % h;
    layout.pad_right = static_cast<int>(w - h + extra);
    layout.frames = static_cast<int>((base + extra) / h + 1);
  } else {
    if (n < w) {
      throw ShapeError("stft: clip of " + std::to_string(n) +
                       " samples is shorter than one window (" +
                       std::to_string(w) + ")");
    }
    layout.frames = static_cast<int>((n - w) / h + 1);
  }
  return layout;
}

RealMatrix Spectrogram::magnitude() const { return bins.cwiseAbs(); }

Spectrogram stft(const AudioClip& clip, const StftConfig& cfg) {
  if (clip.size() < static_cast<std::size_t>(cfg.window_len())) {
    throw ShapeError("stft: clip '" + clip.id() + "' has " +
                     std::to_string(clip.size()) +
                     " samples, shorter than window_len " +
                     std::to_string(cfg.window_len()));
  }
  Spectrogram spec{.bins = {},
                   .config = cfg,
                   .layout = FrameLayout::compute(cfg, clip.size()),
                   .origin_len = clip.size(),
                   .sample_rate = clip.sample_rate()};
  const std::vector<double> w = cfg.window_samples();
  const int n_fft = cfg.fft_len();
  spec.bins.resize(spec.layout.frames, cfg.bins());

  std::vector<double> frame(n_fft);
  const auto samples = clip.samples();
  const long long len = static_cast<long long>(clip.size());
  for (int t = 0; t < spec.layout.frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const long long start =
        static_cast<long long>(t) * cfg.hop() - spec.layout.pad_left;
    for (int n = 0; n < cfg.window_len(); ++n) {
      const long long idx = start + n;
      if (idx >= 0 && idx < len) frame[n] = samples[idx] * w[n];
    }
    fft::rfft(frame, std::span<Complex>(spec.bins.row(t).data(), cfg.bins()));
  }
  return spec;
}

AudioClip istft(const Spectrogram& spec) {
  const StftConfig& cfg = spec.config;
  const std::vector<double> w = cfg.window_samples();
  const int n_fft = cfg.fft_len();
  const int hop = cfg.hop();
  const std::vector<double> den = wola_denominator(w, spec.layout, hop);

  std::vector<double> padded(den.size(), 0.0);
  std::vector<double> frame(n_fft);
  const double scale = 1.0 / n_fft;
  for (int t = 0; t < spec.frames(); ++t) {
    fft::irfft(std::span<const Complex>(spec.bins.row(t).data(), cfg.bins()), frame);
    const std::size_t off = static_cast<std::size_t>(t) * hop;
    for (int n = 0; n < cfg.window_len(); ++n) {
      padded[off + n] += w[n] * frame[n] * scale;
    }
  }

  const double den_max = *std::max_element(den.begin(), den.end());
  std::vector<double> out(spec.origin_len, 0.0);
  for (std::size_t i = 0; i < spec.origin_len; ++i) {
    const std::size_t m = i + spec.layout.pad_left;
    if (m >= den.size() || den[m] <= 1e-12 * den_max) {
      throw NumericError("istft: zero overlap-add normalization at sample " +
                         std::to_string(i) + " (window/padding leave it uncovered)");
    }
    out[i] = padded[m] / den[m];
  }
  return AudioClip(std::move(out), spec.sample_rate);
}

std::vector<double> stft_adjoint(const ComplexMatrix& grad,
                                 const StftConfig& cfg, std::size_t origin_len) {
  const FrameLayout layout = FrameLayout::compute(cfg, origin_len);
  if (grad.rows() != layout.frames || grad.cols() != cfg.bins()) {
    throw ShapeError("stft_adjoint: gradient shape does not match config");
  }
  const std::vector<double> w = cfg.window_samples();
  const int n_fft = cfg.fft_len();
  const int half = n_fft / 2;
  std::vector<Complex> z(cfg.bins());
  std::vector<double> g(n_fft);
  std::vector<double> out(origin_len, 0.0);
  for (int t = 0; t < layout.frames; ++t) {
    // Re(sum_k G_k e^{+i 2 pi k n / N}) through a half-spectrum c2r.
    for (int k = 0; k <= half; ++k) {
      z[k] = (k == 0 || k == half) ? grad(t, k) : 0.5 * grad(t, k);
    }
    fft::irfft(z, g);
    const long long start =
        static_cast<long long>(t) * cfg.hop() - layout.pad_left;
    for (int n = 0; n < cfg.window_len(); ++n) {
      const long long idx = start + n;
      if (idx >= 0 && idx < static_cast<long long>(origin_len)) {
        out[idx] += w[n] * g[n];
      }
    }
  }
  return out;
}

ComplexMatrix istft_adjoint(std::span<const double> grad_out,
                            const StftConfig& cfg, std::size_t origin_len) {
  if (grad_out.size() != origin_len) {
    throw ShapeError("istft_adjoint: gradient length does not match origin_len");
  }
  const FrameLayout layout = FrameLayout::compute(cfg, origin_len);
  const std::vector<double> w = cfg.window_samples();
  const std::vector<double> den = wola_denominator(w, layout, cfg.hop());
  const int n_fft = cfg.fft_len();
  const int half = n_fft / 2;

  std::vector<double> padded(den.size(), 0.0);
  for (std::size_t i = 0; i < origin_len; ++i) {
    const std::size_t m = i + layout.pad_left;
    padded[m] = grad_out[i] / den[m];
  }

  ComplexMatrix out(layout.frames, cfg.bins());
  std::vector<double> g(n_fft);
  std::vector<Complex> bins(cfg.bins());
  for (int t = 0; t < layout.frames; ++t) {
    std::fill(g.begin(), g.end(), 0.0);
    const std::size_t off = static_cast<std::size_t>(t) * cfg.hop();
    for (int n = 0; n < cfg.window_len(); ++n) g[n] = w[n] * padded[off + n];
    fft::rfft(g, bins);
    for (int k = 0; k <= half; ++k) {
      if (k == 0 || k == half) {
        out(t, k) = Complex(bins[k].real() / n_fft, 0.0);
      } else {
        out(t, k) = bins[k] * (2.0 / n_fft);
      }
    }
  }
  return out;
}

}  // namespace semmix
