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

#include "semmix/audio.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "semmix/error.h"

namespace semmix {

AudioClip::AudioClip(std::vector<double> samples, int sample_rate,
                     std::string id)
    : samples_(std::move(samples)), sample_rate_(sample_rate), id_(std::move(id)) {
  if (sample_rate_ <= 0) {
    throw ConfigError("AudioClip: sample_rate must be positive, got " +
                      std::to_string(sample_rate_));
  }
  if (samples_.empty()) throw ShapeError("AudioClip: empty sample buffer");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw NumericError("AudioClip '" + id_ + "': non-finite sample at index " +
                         std::to_string(i));
    }
  }
}

AudioClip AudioClip::scaled(double k) const {
  std::vector<double> out(samples_);
  for (double& v : out) v *= k;
  return AudioClip(std::move(out), sample_rate_, id_);
}

AudioClip AudioClip::with_id(std::string id) const {
  return AudioClip(samples_, sample_rate_, std::move(id));
}

void require_same_shape(const AudioClip& a, const AudioClip& b,
                        const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": length mismatch (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  if (a.sample_rate() != b.sample_rate()) {
    throw ShapeError(std::string(what) + ": sample rate mismatch (" +
                     std::to_string(a.sample_rate()) + " vs " +
                     std::to_string(b.sample_rate()) + ")");
  }
}

AudioClip operator+(const AudioClip& a, const AudioClip& b) {
  require_same_shape(a, b, "AudioClip sum");
  std::vector<double> out(a.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return AudioClip(std::move(out), a.sample_rate(), a.id());
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double peak_abs(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

// ---------------------------------------------------------------------------
// WAV

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& msg) -> DataError {
    return DataError(path.string() + ": " + msg);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const auto len = load_le<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Truncated data chunk: keep what is there.
      if (std::memcmp(chunk, "data", 4) == 0) {
        data = bytes.data() + body;
        data_len = bytes.size() - body;
      }
      break;
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw fail("fmt chunk too short");
      format = load_le<std::uint16_t>(chunk + 8);
      channels = load_le<std::uint16_t>(chunk + 10);
      rate = load_le<std::uint32_t>(chunk + 12);
      bits = load_le<std::uint16_t>(chunk + 22);
      if (format == kFormatExtensible && len >= 26) {
        format = load_le<std::uint16_t>(chunk + 32);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1u);
  }
  if (channels == 0) throw fail("missing fmt chunk");
  if (data == nullptr) throw fail("missing data chunk");
  if (channels > 2) {
    throw fail("only mono and stereo are supported, got " +
               std::to_string(channels) + " channels");
  }
  if (expected_rate > 0 && static_cast<int>(rate) != expected_rate) {
    throw fail("sample rate " + std::to_string(rate) + " != expected " +
               std::to_string(expected_rate) + " (resampling not supported)");
  }

  const auto decode = [&](const unsigned char* p) -> double {
    if (format == kFormatFloat && bits == 32) {
      return static_cast<double>(load_le<float>(p));
    }
    if (format == kFormatPcm && bits == 16) {
      return load_le<std::int16_t>(p) / 32768.0;
    }
    if (format == kFormatPcm && bits == 24) {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    throw fail("unsupported encoding (format " + std::to_string(format) +
               ", " + std::to_string(bits) + " bits)");
  };

  const std::size_t frame_bytes = channels * (bits / 8u);
  const std::size_t n = data_len / frame_bytes;
  if (n == 0) throw fail("no samples");
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      acc += decode(data + i * frame_bytes + c * (bits / 8u));
    }
    samples[i] = acc / channels;
  }
  return AudioClip(std::move(samples), static_cast<int>(rate),
                   path.stem().string());
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding) {
  std::uint16_t format = kFormatPcm;
  std::uint16_t bits = 16;
  switch (encoding) {
    case WavEncoding::kPcm16: break;
    case WavEncoding::kPcm24: bits = 24; break;
    case WavEncoding::kFloat32:
      format = kFormatFloat;
      bits = 32;
      break;
  }
  const std::uint32_t bytes_per_sample = bits / 8u;
  const auto data_len = static_cast<std::uint32_t>(clip.size() * bytes_per_sample);

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_le<std::uint32_t>(out, 36 + data_len);
  out.append("WAVEfmt ");
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, format);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put_le<std::uint32_t>(out, clip.sample_rate() * bytes_per_sample);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_le<std::uint16_t>(out, bits);
  out.append("data");
  put_le<std::uint32_t>(out, data_len);

  for (double v : clip.samples()) {
    switch (encoding) {
      case WavEncoding::kFloat32:
        put_le<float>(out, static_cast<float>(v));
        break;
      case WavEncoding::kPcm16: {
        const double c = std::clamp(v, -1.0, 32767.0 / 32768.0);
        put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(c * 32768.0)));
        break;
      }
      case WavEncoding::kPcm24: {
        const double c = std::clamp(v, -1.0, 8388607.0 / 8388608.0);
        const auto s = static_cast<std::int32_t>(std::lround(c * 8388608.0));
        out.push_back(static_cast<char>(s & 0xFF));
        out.push_back(static_cast<char>((s >> 8) & 0xFF));
        out.push_back(static_cast<char>((s >> 16) & 0xFF));
        break;
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write WAV file: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write: " + path.string());
}

}  // namespace semmix
