// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace birdssl {

/// Mono waveform. Samples are nominally in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate_hz = 16000;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  /// Throws kInvalidArgument / kNonFinite if the clip is empty, has a
  /// non-positive rate, or carries a non-finite sample.
  void validate() const;
};

struct FrontendConfig {
  int sample_rate_hz = 16000;
  int n_fft = 1024;
  int hop = 320;
  int n_mels = 128;
  double window_s = 5.0;
  double log_epsilon = 1e-5;
  double mel_fmin_hz = 50.0;
  double mel_fmax_hz = 8000.0;

  void validate() const;
  std::size_t window_samples() const;
};

/// F x T log-mel matrix stored frequency-major (row f holds all frames).
class MelSpectrogram {
 public:
  MelSpectrogram() = default;
  MelSpectrogram(int n_mels, int n_frames, double hop_s = 0.0, float fill = 0.0f);

  int n_mels() const noexcept { return n_mels_; }
  int n_frames() const noexcept { return n_frames_; }
  double hop_s() const noexcept { return hop_s_; }
  std::size_t size() const noexcept { return values_.size(); }

  float& at(int f, int t) { return values_[static_cast<std::size_t>(f) * n_frames_ + t]; }
  float at(int f, int t) const {
    return values_[static_cast<std::size_t>(f) * n_frames_ + t];
  }
  std::span<float> row(int f) {
    return {values_.data() + static_cast<std::size_t>(f) * n_frames_,
            static_cast<std::size_t>(n_frames_)};
  }
  std::span<const float> row(int f) const {
    return {values_.data() + static_cast<std::size_t>(f) * n_frames_,
            static_cast<std::size_t>(n_frames_)};
  }
  std::vector<float>& values() noexcept { return values_; }
  const std::vector<float>& values() const noexcept { return values_; }

  bool same_shape(const MelSpectrogram& other) const noexcept {
    return n_mels_ == other.n_mels_ && n_frames_ == other.n_frames_;
  }
  double mean() const;

  friend bool operator==(const MelSpectrogram&, const MelSpectrogram&) = default;

 private:
  int n_mels_ = 0;
  int n_frames_ = 0;
  double hop_s_ = 0.0;
  std::vector<float> values_;
};

AudioClip load_wav(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kFloat32 };
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::kPcm16);
/// Interleaved multi-channel writer; `frames` holds one vector per channel.
void write_wav(const std::filesystem::path& path,
               const std::vector<std::vector<float>>& channels, int sample_rate_hz,
               WavEncoding encoding);

/// Linear-interpolation resampler; output length is
/// round(len * target_hz / source_hz).
AudioClip resample(const AudioClip& clip, int target_hz);

/// Extends a clip to `duration_s` by wrapping around: out[i] = in[i mod len].
AudioClip pad_circular(const AudioClip& clip, double duration_s);
AudioClip pad_circular_to(const AudioClip& clip, std::size_t n_samples);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular HTK-scale filterbank with area normalization.
class MelFilterbank {
 public:
  explicit MelFilterbank(const FrontendConfig& cfg);

  int n_mels() const noexcept { return static_cast<int>(filters_.size()); }
  int n_bins() const noexcept { return n_bins_; }
  double center_hz(int band) const { return centers_hz_.at(band); }
  /// Weight of FFT bin `bin` in filter `band` (zero outside the support).
  double weight(int band, int bin) const;
  /// out[m] = sum_k w[m][k] * power[k]
  void apply(std::span<const double> power, std::span<double> out) const;

 private:
  struct Filter {
    int first_bin = 0;
    std::vector<double> weights;
  };
  int n_bins_ = 0;
  std::vector<Filter> filters_;
  std::vector<double> centers_hz_;
};

/// Reusable STFT + mel + log pipeline. One instance per thread.
class MelFrontend {
 public:
  explicit MelFrontend(FrontendConfig cfg);

  const FrontendConfig& config() const noexcept { return cfg_; }
  const MelFilterbank& filterbank() const noexcept { return bank_; }

  /// Frames = 1 + floor((len - n_fft) / hop); throws kFrameTooShort when the
  /// clip is shorter than one FFT frame.
  MelSpectrogram operator()(std::span<const float> samples) const;
  MelSpectrogram operator()(const AudioClip& clip) const;

  static int frame_count(std::size_t n_samples, const FrontendConfig& cfg);

 private:
  FrontendConfig cfg_;
  MelFilterbank bank_;
  std::vector<double> window_;
};

MelSpectrogram mel_spectrogram(const AudioClip& clip, const FrontendConfig& cfg = {});

}  // namespace birdssl
