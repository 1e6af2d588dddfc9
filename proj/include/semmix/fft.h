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

#ifndef SEMMIX_FFT_H_
#define SEMMIX_FFT_H_

#include <complex>
#include <span>

namespace semmix::fft {

using Complex = std::complex<double>;

// Thin wrappers over FFTW (estimate-mode plans, cached per size). All
// transforms are unnormalized. Safe to call from several threads.

// Real forward transform: n inputs -> n/2+1 bins.
void rfft(std::span<const double> in, std::span<Complex> out);

// Inverse of rfft up to a factor n: n/2+1 bins -> n real samples. Imaginary
// parts of the DC and (even n) Nyquist bins are ignored.
void irfft(std::span<const Complex> in, std::span<double> out);

// Complex transform of length n; `inverse` selects the +i sign.
void dft(std::span<const Complex> in, std::span<Complex> out, bool inverse);

}  // namespace semmix::fft

#endif  // SEMMIX_FFT_H_
