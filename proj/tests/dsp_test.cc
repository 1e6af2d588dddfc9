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
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gtest/gtest.h"
#include "semmix/dsp.h"
#include "semmix/error.h"
#include "test_util.h"

namespace semmix {
namespace {

using testing::naive_rdft;
using testing::random_clip;
using testing::random_samples;
using testing::rms_diff;
using testing::sine_clip;

double inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

TEST(StftConfigTest, DefaultsAndValidation) {
  StftConfig cfg;
  EXPECT_EQ(cfg.window_len(), 2048);
  EXPECT_EQ(cfg.hop(), 512);
  EXPECT_EQ(cfg.fft_len(), 2048);
  EXPECT_EQ(cfg.window(), WindowType::kHann);
  EXPECT_EQ(cfg.bins(), 1025);

  EXPECT_THROW(StftConfig(256, 0, 256), ConfigError);
  EXPECT_THROW(StftConfig(256, 300, 512), ConfigError);
  EXPECT_THROW(StftConfig(512, 128, 256), ConfigError);
  EXPECT_THROW(StftConfig(256, 100, 256), ConfigError);  // not COLA
  EXPECT_THROW(StftConfig(256, 256, 256, WindowType::kHann), ConfigError);
  EXPECT_NO_THROW(StftConfig(256, 128, 256, WindowType::kHamming));
  EXPECT_NO_THROW(StftConfig(256, 256, 256, WindowType::kRectangular));
}

TEST(StftTest, ZeroClipGivesZeroSpectrogram) {
  AudioClip zero(std::vector<double>(4000, 0.0), 16000);
  const Spectrogram spec = stft(zero, StftConfig(256, 64, 256));
  EXPECT_EQ(spec.bins.cwiseAbs().maxCoeff(), 0.0);
}

TEST(StftTest, FrameCountFollowsLayout) {
  const AudioClip clip = random_clip(1000, 1);
  const StftConfig none(256, 64, 256, WindowType::kHann, PadMode::kNone);
  EXPECT_EQ(stft(clip, none).frames(), (1000 - 256) / 64 + 1);

  const StftConfig edge(256, 64, 256);
  const Spectrogram spec = stft(clip, edge);
  EXPECT_EQ(spec.layout.pad_left, 192);
  const int padded = 1000 + spec.layout.pad_left + spec.layout.pad_right;
  EXPECT_EQ((padded - 256) % 64, 0);
  EXPECT_EQ(spec.frames(), (padded - 256) / 64 + 1);
  EXPECT_GE(spec.layout.pad_right, 192);
}

TEST(StftTest, BinCenteredSineRectangularWindow) {
  constexpr int kWin = 256;
  constexpr int kRate = 16000;
  constexpr int kBin = 20;
  constexpr double kAmp = 0.3;
  const double freq = static_cast<double>(kBin) * kRate / kWin;
  const AudioClip clip = sine_clip(4 * kWin, freq, kAmp, kRate, 0.7);
  const StftConfig cfg(kWin, kWin, kWin, WindowType::kRectangular, PadMode::kNone);
  const Spectrogram spec = stft(clip, cfg);
  ASSERT_EQ(spec.frames(), 4);

  for (int t = 0; t < spec.frames(); ++t) {
    for (int k = 0; k < spec.num_bins(); ++k) {
      const double mag = std::abs(spec.bins(t, k));
      if (k == kBin) {
        EXPECT_NEAR(mag, kWin / 2.0 * kAmp, 1e-9);
      } else {
        EXPECT_LT(mag, 1e-9) << "t=" << t << " k=" << k;
      }
    }
  }
  // Direct DFT of the first frame as an independent check.
  std::vector<double> frame(clip.data().begin(), clip.data().begin() + kWin);
  const auto oracle = naive_rdft(frame);
  for (int k = 0; k < spec.num_bins(); ++k) {
    EXPECT_NEAR(std::abs(spec.bins(0, k) - oracle[k]), 0.0, 1e-9);
  }
}

TEST(StftTest, Linearity) {
  const AudioClip a = random_clip(3000, 2);
  const AudioClip b = random_clip(3000, 3);
  const StftConfig cfg(512, 128, 512);
  const Spectrogram sa = stft(a, cfg), sb = stft(b, cfg), sab = stft(a + b, cfg);
  EXPECT_LT((sab.bins - sa.bins - sb.bins).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(StftTest, ShortClipIsLengthError) {
  const AudioClip clip = random_clip(100, 4);
  EXPECT_THROW(stft(clip, StftConfig(256, 64, 256)), ShapeError);
}

TEST(StftTest, ParsevalRectangularNoOverlap) {
  constexpr int kWin = 128;
  const AudioClip clip = random_clip(kWin * 16, 5);
  const StftConfig cfg(kWin, kWin, kWin, WindowType::kRectangular, PadMode::kNone);
  const Spectrogram spec = stft(clip, cfg);
  double spectral = 0.0;
  for (int t = 0; t < spec.frames(); ++t) {
    for (int k = 0; k < spec.num_bins(); ++k) {
      // Two-sided sum: interior bins appear twice.
      const double weight = (k == 0 || k == kWin / 2) ? 1.0 : 2.0;
      spectral += weight * std::norm(spec.bins(t, k));
    }
  }
  double energy = 0.0;
  for (double v : clip.samples()) energy += v * v;
  EXPECT_LT(std::abs(spectral - kWin * energy) / (kWin * energy), 1e-9);
}

struct GridCase {
  int window_len;
  int hop;
  int fft_len;
  WindowType window;
};

class RoundTripTest : public ::testing::TestWithParam<GridCase> {};

TEST_P(RoundTripTest, IstftInvertsStft) {
  const GridCase c = GetParam();
  const StftConfig cfg(c.window_len, c.hop, c.fft_len, c.window);
  for (std::size_t len : {std::size_t(c.window_len), std::size_t(5000), std::size_t(7777)}) {
    const AudioClip x = random_clip(len, static_cast<unsigned>(len));
    const AudioClip y = istft(stft(x, cfg));
    ASSERT_EQ(y.size(), x.size());
    EXPECT_LT(rms_diff(x.data(), y.data()), 1e-6) << "len=" << len;
  }
}

INSTANTIATE_TEST_SUITE_P(
    ColaGrid, RoundTripTest,
    ::testing::Values(GridCase{2048, 512, 2048, WindowType::kHann},
                      GridCase{256, 64, 256, WindowType::kHann},
                      GridCase{256, 128, 256, WindowType::kHann},
                      GridCase{512, 128, 1024, WindowType::kHann},
                      GridCase{256, 128, 256, WindowType::kHamming},
                      GridCase{256, 64, 512, WindowType::kHamming},
                      GridCase{256, 256, 256, WindowType::kRectangular},
                      GridCase{256, 128, 256, WindowType::kRectangular}));

TEST(IstftTest, ZeroAndScaling) {
  const StftConfig cfg(256, 64, 256);
  AudioClip zero(std::vector<double>(2000, 0.0), 16000);
  const AudioClip z = istft(stft(zero, cfg));
  EXPECT_EQ(peak_abs(z.samples()), 0.0);

  const AudioClip x = random_clip(2000, 6);
  Spectrogram spec = stft(x, cfg);
  spec.bins *= 2.0;
  const AudioClip y = istft(spec);
  EXPECT_LT(rms_diff(y.data(), x.scaled(2.0).data()), 1e-6);
}

TEST(IstftTest, UncoveredSampleIsNumericError) {
  // Periodic Hann is zero at n=0 and no padding leaves sample 0 uncovered.
  const StftConfig cfg(256, 64, 256, WindowType::kHann, PadMode::kNone);
  const AudioClip x = random_clip(1024, 7);
  EXPECT_THROW(istft(stft(x, cfg)), NumericError);
}

TEST(AdjointTest, StftAdjointMatchesInnerProduct) {
  const StftConfig cfg(64, 16, 128);
  const AudioClip x = random_clip(500, 8);
  const Spectrogram spec = stft(x, cfg);
  ComplexMatrix g(spec.frames(), spec.num_bins());
  const auto re = random_samples(g.size(), 9), im = random_samples(g.size(), 10);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = Complex(re[i], im[i]);

  const std::vector<double> xt = stft_adjoint(g, cfg, x.size());
  double rhs = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * xt[i];
  EXPECT_NEAR(inner(spec.bins, g), rhs, 1e-10 * std::abs(rhs));
}

TEST(AdjointTest, IstftAdjointMatchesInnerProduct) {
  const StftConfig cfg(64, 16, 128);
  const std::size_t len = 500;
  const Spectrogram shape = stft(random_clip(len, 11), cfg);
  Spectrogram spec = shape;
  const auto re = random_samples(spec.bins.size(), 12), im = random_samples(spec.bins.size(), 13);
  for (Eigen::Index i = 0; i < spec.bins.size(); ++i) {
    spec.bins.data()[i] = Complex(re[i], im[i]);
  }
  // irfft ignores imaginary DC/Nyquist parts; clear them so both sides agree.
  spec.bins.col(0) = spec.bins.col(0).real().cast<Complex>();
  spec.bins.col(spec.num_bins() - 1) =
      spec.bins.col(spec.num_bins() - 1).real().cast<Complex>();

  const AudioClip y = istft(spec);
  const auto g = random_samples(len, 14);
  const ComplexMatrix yt = istft_adjoint(g, cfg, len);
  double lhs = 0.0;
  for (std::size_t i = 0; i < len; ++i) lhs += y[i] * g[i];
  EXPECT_NEAR(lhs, inner(spec.bins, yt), 1e-10 * std::abs(lhs));
}

TEST(EnvelopeTest, SineAmplitudeInterior) {
  // 437.3 Hz is deliberately not periodic in the clip.
  const AudioClip clip = sine_clip(8000, 437.3, 0.5, 16000);
  const auto env = analytic_envelope(clip);
  ASSERT_EQ(env.size(), clip.size());
  for (std::size_t i = 800; i < 7200; ++i) {
    EXPECT_NEAR(env[i], 0.5, 0.01) << i;
  }
}

TEST(EnvelopeTest, ZeroClip) {
  const auto env = analytic_envelope(AudioClip(std::vector<double>(64, 0.0)));
  for (double v : env) EXPECT_EQ(v, 0.0);
}

TEST(EnvelopeTest, AmDemodulation) {
  constexpr int kRate = 16000;
  constexpr std::size_t kLen = 16000;
  const double fc = 2000.0, fm = 5.0;
  std::vector<double> x(kLen), modulator(kLen);
  for (std::size_t i = 0; i < kLen; ++i) {
    const double t = static_cast<double>(i) / kRate;
    modulator[i] = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * fm * t);
    x[i] = modulator[i] * std::sin(2.0 * std::numbers::pi * fc * t);
  }
  const auto env = analytic_envelope(AudioClip(x, kRate));
  for (std::size_t i = kLen / 10; i < kLen * 9 / 10; ++i) {
    EXPECT_NEAR(env[i], modulator[i], 0.02 * modulator[i]);
  }
}

TEST(EnvelopeTest, SignFlipInvarianceAndLinearScaling) {
  const AudioClip x = random_clip(1001, 15);
  const auto e = analytic_envelope(x);
  const auto neg = analytic_envelope(x.scaled(-1.0));
  const auto big = analytic_envelope(x.scaled(3.0));
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_NEAR(neg[i], e[i], 1e-12);
    EXPECT_NEAR(big[i], 3.0 * e[i], 1e-12);
  }
}

TEST(MelTest, InvalidRange) {
  EXPECT_THROW(mel_filterbank(32, 512, 16000, 100.0, 50.0), ConfigError);
  EXPECT_THROW(mel_filterbank(32, 512, 16000, 0.0, 9000.0), ConfigError);
  EXPECT_THROW(mel_filterbank(0, 512, 16000, 0.0, 8000.0), ConfigError);
}

TEST(MelTest, ZeroSpectrogram) {
  AudioClip zero(std::vector<double>(4096, 0.0), 16000);
  const RealMatrix e = mel_band_energies(stft(zero, StftConfig(512, 128, 512)), 16, 0, 8000);
  EXPECT_EQ(e.maxCoeff(), 0.0);
}

TEST(MelTest, WhiteNoiseFollowsFilterRowSums) {
  constexpr int kRate = 16000;
  const StftConfig cfg(512, 512, 512, WindowType::kRectangular, PadMode::kNone);
  const AudioClip noise = random_clip(512 * 400, 16, kRate);
  const Spectrogram spec = stft(noise, cfg);
  ASSERT_GE(spec.frames(), 100);
  const int bands = 24;
  const double fmin = 200.0, fmax = 7000.0;
  const RealMatrix energies = mel_band_energies(spec, bands, fmin, fmax);
  const RealMatrix fb = mel_filterbank(bands, 512, kRate, fmin, fmax);

  // Uniform(-a, a) has variance a^2/3; every rfft bin of white noise has
  // expected power variance * sum(w^2) = variance * 512 for this window.
  const double bin_power = (0.25 / 3.0) * 512.0;
  const Eigen::VectorXd mean = energies.colwise().mean();
  for (int b = 0; b < bands; ++b) {
    const double expected = bin_power * fb.row(b).sum();
    EXPECT_NEAR(mean(b), expected, 0.10 * expected) << "band " << b;
  }
}

TEST(MelTest, ToneOnlyInOverlappingBands) {
  constexpr int kRate = 16000;
  constexpr int kBin = 40;  // 1250 Hz
  const StftConfig cfg(512, 512, 512, WindowType::kRectangular, PadMode::kNone);
  const AudioClip tone = sine_clip(512 * 8, kBin * static_cast<double>(kRate) / 512, 0.5, kRate);
  const RealMatrix energies = mel_band_energies(stft(tone, cfg), 20, 0.0, 8000.0);
  const RealMatrix fb = mel_filterbank(20, 512, kRate, 0.0, 8000.0);
  for (int b = 0; b < 20; ++b) {
    const double e = energies.col(b).mean();
    if (fb(b, kBin) > 0.0) {
      EXPECT_GT(e, 1.0) << b;
    } else {
      EXPECT_LT(e, 1e-12) << b;
    }
  }
}

TEST(LoudnessTest, FullScaleIsZeroDb) {
  const auto traj = loudness_trajectory(AudioClip(std::vector<double>(4096, 1.0)), 512, 256);
  ASSERT_EQ(traj.frames.size(), (4096u - 512) / 256 + 1);
  for (double v : traj.frames) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(LoudnessTest, SilenceClampsToFloor) {
  const auto traj = loudness_trajectory(AudioClip(std::vector<double>(2048, 0.0)), 512, 512, -70.0);
  for (double v : traj.frames) EXPECT_EQ(v, -70.0);
}

TEST(LoudnessTest, AmplitudeStep) {
  constexpr std::size_t kLen = 4096;
  std::vector<double> x(kLen);
  for (std::size_t i = 0; i < kLen; ++i) x[i] = i < kLen / 2 ? 0.1 : 1.0;
  constexpr int kFrame = 256, kHop = 128;
  const auto traj = loudness_trajectory(AudioClip(x), kFrame, kHop);
  for (std::size_t t = 0; t < traj.frames.size(); ++t) {
    const std::size_t start = t * kHop, end = start + kFrame;
    const double lo = static_cast<double>(std::min(end, kLen / 2) - std::min(start, kLen / 2));
    const double hi = kFrame - lo;
    const double expected = 10.0 * std::log10((lo * 0.01 + hi * 1.0) / kFrame);
    EXPECT_NEAR(traj.frames[t], expected, 1e-9);
  }
  EXPECT_NEAR(traj.frames.back() - traj.frames.front(), 20.0, 1e-9);
}

TEST(LoudnessTest, GainShiftsTrajectory) {
  const AudioClip x = random_clip(4000, 17);
  const auto a = loudness_trajectory(x, 400, 200);
  const auto b = loudness_trajectory(x.scaled(0.3), 400, 200);
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    EXPECT_NEAR(b.frames[t], a.frames[t] + 20.0 * std::log10(0.3), 1e-9);
  }
}

TEST(LoudnessTest, FrameLongerThanClip) {
  EXPECT_THROW(loudness_trajectory(random_clip(100, 18), 200, 50), ShapeError);
}

class WavTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() / "semmix_wav_test";
  void SetUp() override { std::filesystem::create_directories(dir_); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(WavTest, EncodingsRoundTrip) {
  const AudioClip x = random_clip(1000, 19, 44100);
  const struct {
    WavEncoding enc;
    double tol;
  } cases[] = {{WavEncoding::kPcm16, 1.0 / 32768},
               {WavEncoding::kPcm24, 1.0 / 8388608},
               {WavEncoding::kFloat32, 1e-7}};
  for (const auto& c : cases) {
    const auto path = dir_ / "x.wav";
    write_wav(path, x, c.enc);
    const AudioClip y = read_wav(path, 44100);
    ASSERT_EQ(y.size(), x.size());
    EXPECT_EQ(y.sample_rate(), 44100);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], c.tol);
  }
}

TEST_F(WavTest, StereoDownmixAndRateMismatch) {
  // Hand-built 16-bit stereo file: L = 0.5, R = -0.25 (two frames).
  const auto path = dir_ / "stereo.wav";
  {
    std::ofstream f(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
    f.write("RIFF", 4); u32(36 + 8); f.write("WAVEfmt ", 8);
    u32(16); u16(1); u16(2); u32(22050); u32(22050 * 4); u16(4); u16(16);
    f.write("data", 4); u32(8);
    for (int i = 0; i < 2; ++i) { u16(16384); u16(static_cast<std::uint16_t>(-8192)); }
  }
  const AudioClip y = read_wav(path);
  ASSERT_EQ(y.size(), 2u);
  EXPECT_NEAR(y[0], 0.125, 1e-12);
  EXPECT_EQ(y.sample_rate(), 22050);
  EXPECT_THROW(read_wav(path, 44100), DataError);
  EXPECT_THROW(read_wav(dir_ / "missing.wav"), DataError);
}

TEST(AudioClipTest, Invariants) {
  EXPECT_THROW(AudioClip({}, 16000), ShapeError);
  EXPECT_THROW(AudioClip({0.0}, 0), ConfigError);
  EXPECT_THROW(AudioClip({std::nan("")}, 16000), NumericError);
}

}  // namespace
}  // namespace semmix
