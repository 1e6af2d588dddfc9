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

#include "semmix/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "semmix/error.h"

namespace semmix::fft {
namespace {

enum class Kind { kR2C, kC2R, kForward, kBackward };

// Scratch buffers aligned the way FFTW expects for new-array execution.
struct Buffer {
  explicit Buffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (ptr == nullptr) throw NumericError("fftw_malloc failed");
  }
  ~Buffer() { fftw_free(ptr); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  void* ptr;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan get_plan(Kind kind, int n) {
  static std::map<std::tuple<Kind, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find({kind, n});
  if (it != cache.end()) return it->second;

  Buffer a(sizeof(fftw_complex) * (n + 2));
  Buffer b(sizeof(fftw_complex) * (n + 2));
  fftw_plan plan = nullptr;
  const unsigned flags = FFTW_ESTIMATE;
  switch (kind) {
    case Kind::kR2C:
      plan = fftw_plan_dft_r2c_1d(n, static_cast<double*>(a.ptr),
                                  static_cast<fftw_complex*>(b.ptr), flags);
      break;
    case Kind::kC2R:
      plan = fftw_plan_dft_c2r_1d(n, static_cast<fftw_complex*>(a.ptr),
                                  static_cast<double*>(b.ptr), flags);
      break;
    case Kind::kForward:
    case Kind::kBackward:
      plan = fftw_plan_dft_1d(n, static_cast<fftw_complex*>(a.ptr),
                              static_cast<fftw_complex*>(b.ptr),
                              kind == Kind::kForward ? FFTW_FORWARD : FFTW_BACKWARD,
                              flags);
      break;
  }
  if (plan == nullptr) throw NumericError("FFTW planning failed for n=" + std::to_string(n));
  cache.emplace(std::make_tuple(kind, n), plan);
  return plan;
}

}  // namespace

void rfft(std::span<const double> in, std::span<Complex> out) {
  const int n = static_cast<int>(in.size());
  if (n < 1 || out.size() != in.size() / 2 + 1) {
    throw ShapeError("rfft: output must hold n/2+1 bins");
  }
  fftw_plan plan = get_plan(Kind::kR2C, n);
  Buffer src(sizeof(double) * n);
  Buffer dst(sizeof(fftw_complex) * (n / 2 + 1));
  std::memcpy(src.ptr, in.data(), sizeof(double) * n);
  fftw_execute_dft_r2c(plan, static_cast<double*>(src.ptr),
                       static_cast<fftw_complex*>(dst.ptr));
  std::memcpy(out.data(), dst.ptr, sizeof(fftw_complex) * out.size());
}

void irfft(std::span<const Complex> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  if (n < 1 || in.size() != out.size() / 2 + 1) {
    throw ShapeError("irfft: input must hold n/2+1 bins");
  }
  fftw_plan plan = get_plan(Kind::kC2R, n);
  Buffer src(sizeof(fftw_complex) * in.size());
  Buffer dst(sizeof(double) * n);
  std::memcpy(src.ptr, in.data(), sizeof(fftw_complex) * in.size());
  fftw_execute_dft_c2r(plan, static_cast<fftw_complex*>(src.ptr),
                       static_cast<double*>(dst.ptr));
  std::memcpy(out.data(), dst.ptr, sizeof(double) * n);
}

void dft(std::span<const Complex> in, std::span<Complex> out, bool inverse) {
  const int n = static_cast<int>(in.size());
  if (n < 1 || out.size() != in.size()) throw ShapeError("dft: size mismatch");
  fftw_plan plan = get_plan(inverse ? Kind::kBackward : Kind::kForward, n);
  Buffer src(sizeof(fftw_complex) * n);
  Buffer dst(sizeof(fftw_complex) * n);
  std::memcpy(src.ptr, in.data(), sizeof(fftw_complex) * n);
  fftw_execute_dft(plan, static_cast<fftw_complex*>(src.ptr),
                   static_cast<fftw_complex*>(dst.ptr));
  std::memcpy(out.data(), dst.ptr, sizeof(fftw_complex) * n);
}

}  // namespace semmix::fft
