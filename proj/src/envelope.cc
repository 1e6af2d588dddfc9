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

#include "semmix/dsp.h"
#include "semmix/error.h"
#include "semmix/fft.h"

namespace semmix {

std::vector<double> analytic_envelope(const AudioClip& clip) {
  const std::size_t n = clip.size();
  if (n < 2) throw ShapeError("analytic_envelope: need at least 2 samples");

  std::vector<Complex> spectrum(n);
  std::vector<Complex> time(n);
  for (std::size_t i = 0; i < n; ++i) time[i] = clip[i];
  fft::dft(time, spectrum, /*inverse=*/false);

  // Keep DC (and Nyquist for even n), double positive, zero negative.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (n % 2 == 0 && k == half) continue;
    spectrum[k] *= (k <= (n - 1) / 2) ? 2.0 : 0.0;
  }
  fft::dft(spectrum, time, /*inverse=*/true);

  std::vector<double> env(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(time[i]) * scale;
  return env;
}

}  // namespace semmix
