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

#ifndef SEMMIX_AUDIO_H_
#define SEMMIX_AUDIO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace semmix {

inline constexpr int kDefaultSampleRate = 44100;

// Mono sample buffer. Invariants (checked on construction): sample_rate > 0,
// at least one sample, every sample finite.
class AudioClip {
 public:
  AudioClip(std::vector<double> samples, int sample_rate = kDefaultSampleRate,
            std::string id = {});

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int sample_rate() const { return sample_rate_; }
  const std::string& id() const { return id_; }

  double operator[](std::size_t i) const { return samples_[i]; }

  AudioClip scaled(double k) const;
  AudioClip with_id(std::string id) const;

 private:
  std::vector<double> samples_;
  int sample_rate_;
  std::string id_;
};

// Throws ShapeError unless both clips have equal length and sample rate.
void require_same_shape(const AudioClip& a, const AudioClip& b,
                        const char* what);

// Elementwise sum; clips must share shape. The id of `a` is kept.
AudioClip operator+(const AudioClip& a, const AudioClip& b);

double rms(std::span<const double> x);
double peak_abs(std::span<const double> x);

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

// Reads PCM 16/24-bit or 32-bit float WAV. Stereo is downmixed by channel
// mean. When expected_rate > 0 a different file rate is a DataError.
AudioClip read_wav(const std::filesystem::path& path, int expected_rate = 0);

void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace semmix

#endif  // SEMMIX_AUDIO_H_
