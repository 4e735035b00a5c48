// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "birdssl/audio.hpp"
#include "birdssl/error.hpp"
#include "test_util.hpp"

namespace birdssl {
namespace {

using testing::TempDir;

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::vector<std::uint8_t> wav_header(std::uint16_t format, std::uint16_t bits,
                                     std::uint32_t data_bytes) {
  std::vector<std::uint8_t> b = {'R', 'I', 'F', 'F'};
  put_u32(b, 36 + data_bytes);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(b, 16);
  put_u16(b, format);
  put_u16(b, 1);
  put_u32(b, 16000);
  put_u32(b, 16000u * bits / 8);
  put_u16(b, static_cast<std::uint16_t>(bits / 8));
  put_u16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put_u32(b, data_bytes);
  return b;
}

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kIo;
}

TEST(LoadWav, ConstantPcm16ScalesToHalf) {
  TempDir dir("wav");
  std::vector<std::uint8_t> b = wav_header(1, 16, 32000);
  for (int i = 0; i < 16000; ++i) put_u16(b, 16384);
  write_bytes(dir / "c.wav", b);
  const AudioClip clip = load_wav(dir / "c.wav");
  ASSERT_EQ(clip.size(), 16000u);
  EXPECT_EQ(clip.sample_rate_hz, 16000);
  for (float s : clip.samples) ASSERT_EQ(s, 0.5f);
}

TEST(LoadWav, StereoIsChannelMean) {
  TempDir dir("wav");
  const std::vector<std::vector<float>> ch = {std::vector<float>(100, 0.2f),
                                              std::vector<float>(100, 0.6f)};
  write_wav(dir / "s.wav", ch, 16000, WavEncoding::kFloat32);
  const AudioClip clip = load_wav(dir / "s.wav");
  ASSERT_EQ(clip.size(), 100u);
  for (float s : clip.samples) EXPECT_NEAR(s, 0.4, 1e-7);
}

TEST(LoadWav, ErrorsAreDistinct) {
  TempDir dir("wav");
  EXPECT_EQ(error_of([&] { load_wav(dir / "absent.wav"); }), Errc::kMissingFile);

  write_bytes(dir / "trunc.wav", {'R', 'I', 'F', 'F', 1, 0});
  EXPECT_EQ(error_of([&] { load_wav(dir / "trunc.wav"); }), Errc::kMalformedHeader);

  std::vector<std::uint8_t> notwave = wav_header(1, 16, 0);
  notwave[8] = 'X';
  write_bytes(dir / "notwave.wav", notwave);
  EXPECT_EQ(error_of([&] { load_wav(dir / "notwave.wav"); }), Errc::kMalformedHeader);

  std::vector<std::uint8_t> adpcm = wav_header(2, 16, 4);
  put_u32(adpcm, 0);
  write_bytes(dir / "adpcm.wav", adpcm);
  EXPECT_EQ(error_of([&] { load_wav(dir / "adpcm.wav"); }), Errc::kUnsupportedEncoding);

  std::vector<std::uint8_t> pcm8 = wav_header(1, 8, 4);
  put_u32(pcm8, 0);
  write_bytes(dir / "pcm8.wav", pcm8);
  EXPECT_EQ(error_of([&] { load_wav(dir / "pcm8.wav"); }), Errc::kUnsupportedEncoding);
}

TEST(LoadWav, RoundTripsBothEncodings) {
  TempDir dir("wav");
  Rng rng = make_rng(7);
  const AudioClip clip = testing::noise_clip(4000, rng);
  write_wav(dir / "f.wav", clip, WavEncoding::kFloat32);
  EXPECT_EQ(load_wav(dir / "f.wav").samples, clip.samples);
  write_wav(dir / "p.wav", clip, WavEncoding::kPcm16);
  const AudioClip back = load_wav(dir / "p.wav");
  ASSERT_EQ(back.size(), clip.size());
  for (std::size_t i = 0; i < clip.size(); ++i) {
    EXPECT_NEAR(back.samples[i], clip.samples[i], 0.5 / 32768 + 1e-9);
  }
}

TEST(Resample, SameRateIsBitwiseIdentity) {
  Rng rng = make_rng(1);
  const AudioClip clip = testing::noise_clip(1234, rng);
  const AudioClip out = resample(clip, 16000);
  EXPECT_EQ(out.samples, clip.samples);
  EXPECT_EQ(out.sample_rate_hz, 16000);
}

TEST(Resample, LengthFollowsRateRatio) {
  Rng rng = make_rng(2);
  EXPECT_EQ(resample(testing::noise_clip(32000, rng, 32000), 16000).size(), 16000u);
  EXPECT_EQ(resample(testing::noise_clip(44100, rng, 44100), 16000).size(), 16000u);
  EXPECT_EQ(resample(testing::noise_clip(1001, rng, 16000), 8000).size(), 501u);
}

TEST(Resample, SineKeepsItsDftPeak) {
  const AudioClip src = testing::sine(1000.0, 1.0, 48000);
  const AudioClip out = resample(src, 16000);
  constexpr int kN = 4096;
  int best = 0;
  double best_mag = -1.0;
  for (int k = 0; k <= kN / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < kN; ++n) {
      acc += static_cast<double>(out.samples[static_cast<std::size_t>(n)]) *
             std::polar(1.0, -2.0 * std::numbers::pi * k * n / kN);
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  EXPECT_NEAR(best, 1000.0 * kN / 16000.0, 1.0);
}

TEST(PadCircular, Examples) {
  Rng rng = make_rng(3);
  const AudioClip five = testing::noise_clip(80000, rng);
  EXPECT_EQ(pad_circular(five, 5.0).samples, five.samples);

  const AudioClip two = testing::noise_clip(32000, rng);
  const AudioClip p2 = pad_circular(two, 5.0);
  ASSERT_EQ(p2.size(), 80000u);
  EXPECT_EQ(p2.samples[32000], two.samples[0]);

  const AudioClip three = testing::noise_clip(51200, rng);
  const AudioClip p3 = pad_circular(three, 5.0);
  ASSERT_EQ(p3.size(), 80000u);
  for (std::size_t i = 51200; i < 80000; ++i) ASSERT_EQ(p3.samples[i], three.samples[i - 51200]);
}

TEST(PadCircular, PropertiesOnRandomLengths) {
  Rng rng = make_rng(4);
  std::uniform_int_distribution<std::size_t> len(1, 100000);
  for (int trial = 0; trial < 50; ++trial) {
    const AudioClip c = testing::noise_clip(len(rng), rng);
    const AudioClip p = pad_circular(c, 5.0);
    ASSERT_EQ(p.size(), std::max<std::size_t>(c.size(), 80000));
    for (std::size_t i = 0; i < c.size(); ++i) ASSERT_EQ(p.samples[i], c.samples[i]);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(p.samples[i], c.samples[i % c.size()]);
    EXPECT_EQ(pad_circular(p, 5.0).samples, p.samples);
  }
}

TEST(MelScale, MatchesHtkDefinition) {
  for (double hz : {0.0, 50.0, 700.0, 1000.0, 4000.0, 8000.0}) {
    EXPECT_NEAR(hz_to_mel(hz), oracle::htk_mel(hz), 1e-9);
    EXPECT_NEAR(mel_to_hz(oracle::htk_mel(hz)), hz, 1e-9);
  }
}

TEST(MelFilterbank, CentersAreEvenlySpacedOnMelScale) {
  const FrontendConfig cfg;
  const MelFilterbank bank(cfg);
  ASSERT_EQ(bank.n_mels(), 128);
  ASSERT_EQ(bank.n_bins(), 513);
  const double lo = oracle::htk_mel(50.0);
  const double hi = oracle::htk_mel(8000.0);
  for (int m = 0; m < 128; ++m) {
    EXPECT_NEAR(bank.center_hz(m), oracle::htk_hz(lo + (m + 1) * (hi - lo) / 129.0), 1e-6);
  }
  for (int m = 0; m < 128; ++m) {
    for (int k = 0; k < bank.n_bins(); ++k) ASSERT_GE(bank.weight(m, k), 0.0);
  }
}

TEST(MelSpectrogram, FrameCountFormula) {
  const FrontendConfig cfg;
  EXPECT_EQ(MelFrontend::frame_count(80000, cfg), oracle::frame_count(80000, 1024, 320));
  EXPECT_EQ(MelFrontend::frame_count(80000, cfg), 247);
  EXPECT_EQ(MelFrontend::frame_count(1024, cfg), 1);
  EXPECT_EQ(MelFrontend::frame_count(1343, cfg), 1);
  EXPECT_EQ(MelFrontend::frame_count(1344, cfg), 2);
  Rng rng = make_rng(5);
  std::uniform_int_distribution<long> len(1024, 200000);
  for (int i = 0; i < 100; ++i) {
    const long n = len(rng);
    EXPECT_EQ(MelFrontend::frame_count(static_cast<std::size_t>(n), cfg),
              oracle::frame_count(n, 1024, 320));
  }
}

TEST(MelSpectrogram, FiveSecondShape) {
  Rng rng = make_rng(6);
  const MelSpectrogram s = mel_spectrogram(testing::noise_clip(80000, rng));
  EXPECT_EQ(s.n_mels(), 128);
  EXPECT_EQ(s.n_frames(), 247);
  EXPECT_DOUBLE_EQ(s.hop_s(), 320.0 / 16000.0);
}

TEST(MelSpectrogram, SilenceIsTheFloor) {
  AudioClip silent;
  silent.samples.assign(80000, 0.0f);
  const MelSpectrogram s = mel_spectrogram(silent);
  const float floor = static_cast<float>(std::log(1e-5));
  for (float v : s.values()) ASSERT_EQ(v, floor);
}

TEST(MelSpectrogram, TooShortClipFails) {
  AudioClip c;
  c.samples.assign(1023, 0.1f);
  EXPECT_EQ(error_of([&] { mel_spectrogram(c); }), Errc::kFrameTooShort);
}

TEST(MelSpectrogram, ToneAtBandCenterPeaksInThatBand) {
  const FrontendConfig cfg;
  const MelFrontend frontend(cfg);
  const double lo = oracle::htk_mel(cfg.mel_fmin_hz);
  const double hi = oracle::htk_mel(cfg.mel_fmax_hz);
  for (int band : {30, 50, 64, 90, 110, 120}) {
    const double hz = oracle::htk_hz(lo + (band + 1) * (hi - lo) / (cfg.n_mels + 1));
    const MelSpectrogram s = frontend(testing::sine(hz, 1.0));
    int best = 0;
    double best_v = -1e300;
    for (int f = 0; f < s.n_mels(); ++f) {
      double mean = 0.0;
      for (float v : s.row(f)) mean += v;
      if (mean > best_v) {
        best_v = mean;
        best = f;
      }
    }
    EXPECT_EQ(best, band) << "tone " << hz << " Hz";
  }
}

TEST(MelSpectrogram, ScalingUpNeverDecreasesAnyEntry) {
  Rng rng = make_rng(8);
  std::uniform_real_distribution<double> gain(1.0001, 4.0);
  for (int trial = 0; trial < 10; ++trial) {
    AudioClip c = testing::noise_clip(8000, rng, 16000, 0.2);
    AudioClip louder = c;
    const double g = gain(rng);
    for (auto& s : louder.samples) s = static_cast<float>(s * g);
    const MelSpectrogram a = mel_spectrogram(c);
    const MelSpectrogram b = mel_spectrogram(louder);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_GE(b.values()[i], a.values()[i]);
  }
}

TEST(AudioClip, ValidateRejectsBadClips) {
  AudioClip empty;
  EXPECT_EQ(error_of([&] { empty.validate(); }), Errc::kEmptyInput);
  AudioClip nan;
  nan.samples = {0.0f, std::nanf("")};
  EXPECT_EQ(error_of([&] { nan.validate(); }), Errc::kNonFinite);
}

TEST(FrontendConfig, RejectsBrokenInvariants) {
  FrontendConfig c;
  c.hop = 2048;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.n_mels = 600;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.log_epsilon = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.window_s = 0.0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NO_THROW(FrontendConfig{}.validate());
}

}  // namespace
}  // namespace birdssl
