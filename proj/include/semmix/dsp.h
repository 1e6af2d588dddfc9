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

#ifndef SEMMIX_DSP_H_
#define SEMMIX_DSP_H_

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semmix/audio.h"

namespace semmix {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class WindowType { kHann, kHamming, kRectangular };

// kEdge pads (window_len - hop) zeros on both sides, plus the few zeros needed
// on the right to complete the last frame, so every input sample sits under a
// full set of overlapping frames and istft(stft(x)) reproduces x exactly.
// kNone frames the raw signal and drops the final partial frame.
enum class PadMode { kEdge, kNone };

std::string to_string(WindowType w);
std::string to_string(PadMode p);
WindowType window_type_from_string(const std::string& s);
PadMode pad_mode_from_string(const std::string& s);

// STFT analysis parameters. The constructor rejects configs that violate
// 0 < hop <= window_len <= fft_len, odd fft_len, or the constant-overlap-add
// condition for the chosen window.
class StftConfig {
 public:
  StftConfig() : StftConfig(2048, 512, 2048) {}
  StftConfig(int window_len, int hop, int fft_len,
             WindowType window = WindowType::kHann,
             PadMode padding = PadMode::kEdge);

  int window_len() const { return window_len_; }
  int hop() const { return hop_; }
  int fft_len() const { return fft_len_; }
  int bins() const { return fft_len_ / 2 + 1; }
  WindowType window() const { return window_; }
  PadMode padding() const { return padding_; }

  // Periodic window of window_len samples.
  std::vector<double> window_samples() const;

  bool operator==(const StftConfig&) const = default;

 private:
  int window_len_;
  int hop_;
  int fft_len_;
  WindowType window_;
  PadMode padding_;
};

// Framing of a signal of `origin_len` samples under a config.
struct FrameLayout {
  int pad_left = 0;
  int pad_right = 0;
  int frames = 0;

  static FrameLayout compute(const StftConfig& cfg, std::size_t origin_len);
};

// Complex time-frequency grid, frames x (fft_len/2 + 1).
struct Spectrogram {
  ComplexMatrix bins;
  StftConfig config;
  FrameLayout layout;
  std::size_t origin_len = 0;
  int sample_rate = kDefaultSampleRate;

  int frames() const { return static_cast<int>(bins.rows()); }
  int num_bins() const { return static_cast<int>(bins.cols()); }
  RealMatrix magnitude() const;
};

Spectrogram stft(const AudioClip& clip, const StftConfig& cfg = {});

// Weighted overlap-add inverse: each frame is windowed again and the sum is
// divided by the accumulated squared window. Throws NumericError if that
// denominator vanishes at any output sample.
AudioClip istft(const Spectrogram& spec);

// Adjoints of the two linear maps above, used for backpropagation through
// the decode path. `grad` holds dL/dRe + i dL/dIm per bin.
std::vector<double> stft_adjoint(const ComplexMatrix& grad,
                                 const StftConfig& cfg, std::size_t origin_len);
ComplexMatrix istft_adjoint(std::span<const double> grad_out,
                            const StftConfig& cfg, std::size_t origin_len);

// Magnitude of the analytic signal built in the frequency domain.
std::vector<double> analytic_envelope(const AudioClip& clip);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with peaks evenly spaced on the mel scale between fmin
// and fmax, sampled at the rfft bin frequencies. n_bands x (fft_len/2 + 1).
RealMatrix mel_filterbank(int n_bands, int fft_len, int sample_rate,
                          double fmin, double fmax);

// Filterbank applied to squared magnitudes: frames x n_bands.
RealMatrix mel_band_energies(const Spectrogram& spec, int n_bands,
                             double fmin, double fmax);

enum class StemClass { kSpeech, kMusic, kEffects, kMix };
std::string to_string(StemClass c);
StemClass stem_class_from_string(const std::string& s);

inline constexpr double kDefaultFloorDb = -80.0;

struct LoudnessTrajectory {
  std::vector<double> frames;  // dBFS, clamped at floor_db
  int frame_len = 0;
  int hop = 0;
  StemClass stem_class = StemClass::kMix;
  double floor_db = kDefaultFloorDb;
};

// Per-frame 20*log10(RMS), no padding, final partial frame dropped.
LoudnessTrajectory loudness_trajectory(const AudioClip& clip, int frame_len,
                                       int hop,
                                       double floor_db = kDefaultFloorDb,
                                       StemClass stem_class = StemClass::kMix);

// Whole-clip RMS level in dBFS, clamped at floor_db.
double integrated_loudness(std::span<const double> x,
                           double floor_db = kDefaultFloorDb);

}  // namespace semmix

#endif  // SEMMIX_DSP_H_
