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

#include "semmix/dsp.h"
#include "semmix/error.h"

namespace semmix {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

RealMatrix mel_filterbank(int n_bands, int fft_len, int sample_rate,
                          double fmin, double fmax) {
  if (n_bands < 1) throw ConfigError("mel_filterbank: n_bands must be >= 1");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw ConfigError("mel_filterbank: need 0 <= fmin < fmax <= sample_rate/2");
  }
  const int bins = fft_len / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_bands + 2);
  for (int i = 0; i < n_bands + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_bands + 1));
  }

  RealMatrix fb = RealMatrix::Zero(n_bands, bins);
  for (int b = 0; b < n_bands; ++b) {
    const double lo = edges[b], center = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_len;
      const double rise = (f - lo) / (center - lo);
      const double fall = (hi - f) / (hi - center);
      fb(b, k) = std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

RealMatrix mel_band_energies(const Spectrogram& spec, int n_bands, double fmin,
                             double fmax) {
  const RealMatrix fb = mel_filterbank(n_bands, spec.config.fft_len(),
                                       spec.sample_rate, fmin, fmax);
  const RealMatrix power = spec.bins.cwiseAbs2();
  return power * fb.transpose();
}

}  // namespace semmix
