// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "birdssl/error.hpp"

namespace birdssl {

void AudioClip::validate() const {
  require(!samples.empty(), Errc::kEmptyInput, "audio clip has no samples");
  require(sample_rate_hz > 0, Errc::kInvalidArgument, "sample rate must be positive");
  for (float s : samples) {
    require(std::isfinite(s), Errc::kNonFinite, "audio clip contains a non-finite sample");
  }
}

void FrontendConfig::validate() const {
  require(sample_rate_hz > 0, Errc::kInvalidArgument, "frontend: sample_rate_hz must be > 0");
  require(hop > 0 && n_fft > hop, Errc::kInvalidArgument, "frontend: need n_fft > hop > 0");
  require(n_mels >= 1 && n_mels <= n_fft / 2 + 1, Errc::kInvalidArgument,
          "frontend: n_mels must be in [1, n_fft/2 + 1]");
  require(window_s > 0.0, Errc::kInvalidArgument, "frontend: window_s must be > 0");
  require(log_epsilon > 0.0, Errc::kInvalidArgument, "frontend: log_epsilon must be > 0");
  require(mel_fmin_hz >= 0.0 && mel_fmax_hz > mel_fmin_hz &&
              mel_fmax_hz <= sample_rate_hz / 2.0,
          Errc::kInvalidArgument, "frontend: need 0 <= fmin < fmax <= rate/2");
}

std::size_t FrontendConfig::window_samples() const {
  return static_cast<std::size_t>(std::llround(window_s * sample_rate_hz));
}

MelSpectrogram::MelSpectrogram(int n_mels, int n_frames, double hop_s, float fill)
    : n_mels_(n_mels), n_frames_(n_frames), hop_s_(hop_s) {
  require(n_mels >= 1 && n_frames >= 1, Errc::kInvalidArgument,
          "spectrogram dimensions must be positive");
  values_.assign(static_cast<std::size_t>(n_mels) * n_frames, fill);
}

double MelSpectrogram::mean() const {
  if (values_.empty()) return 0.0;
  double acc = 0.0;
  for (float v : values_) acc += v;
  return acc / static_cast<double>(values_.size());
}

// ---------------------------------------------------------------------------
// RIFF/WAVE

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(Errc::kMissingFile, "no such audio file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kMissingFile, "cannot open audio file: " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(Errc::kMalformedHeader, "missing RIFF/WAVE signature" + where);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) fail(Errc::kMalformedHeader, "truncated fmt chunk" + where);
      const unsigned char* f = bytes.data() + body;
      format = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40 || available < 40) {
          fail(Errc::kMalformedHeader, "truncated extensible fmt chunk" + where);
        }
        format = read_u16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, available);
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) fail(Errc::kMalformedHeader, "no fmt chunk" + where);
  if (data == nullptr) fail(Errc::kMalformedHeader, "no data chunk" + where);
  if (channels == 0 || rate == 0) fail(Errc::kMalformedHeader, "zero channels or rate" + where);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    fail(Errc::kUnsupportedEncoding, "unsupported encoding (format " + std::to_string(format) +
                                         ", " + std::to_string(bits) + " bits)" + where);
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = data_size / frame_bytes;

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(p);
        float v;
        std::memcpy(&v, &raw, sizeof v);
        acc += v;
      }
    }
    clip.samples[i] = static_cast<float>(acc / channels);
  }
  return clip;
}

void write_wav(const std::filesystem::path& path,
               const std::vector<std::vector<float>>& channels, int sample_rate_hz,
               WavEncoding encoding) {
  require(!channels.empty(), Errc::kInvalidArgument, "write_wav: no channels");
  require(sample_rate_hz > 0, Errc::kInvalidArgument, "write_wav: bad sample rate");
  const std::size_t n = channels.front().size();
  for (const auto& c : channels) {
    require(c.size() == n, Errc::kShapeMismatch, "write_wav: channel lengths differ");
  }
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(n_ch * bits / 8);
  const auto data_size = static_cast<std::uint32_t>(n * block);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, n_ch);
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz) * block);
  put_u16(out, block);
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_size);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : channels) {
      if (encoding == WavEncoding::kPcm16) {
        const double scaled = std::round(static_cast<double>(c[i]) * 32768.0);
        const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        put_u16(out, static_cast<std::uint16_t>(q));
      } else {
        std::uint32_t raw;
        std::memcpy(&raw, &c[i], sizeof raw);
        put_u32(out, raw);
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(Errc::kIo, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(Errc::kIo, "short write to " + path.string());
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding) {
  write_wav(path, std::vector<std::vector<float>>{clip.samples}, clip.sample_rate_hz,
            encoding);
}

// ---------------------------------------------------------------------------
// Time-domain ops

AudioClip resample(const AudioClip& clip, int target_hz) {
  require(target_hz > 0, Errc::kInvalidArgument, "resample: target rate must be positive");
  require(clip.sample_rate_hz > 0, Errc::kInvalidArgument, "resample: source rate must be positive");
  if (target_hz == clip.sample_rate_hz) return clip;

  const std::size_t len = clip.samples.size();
  const auto out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(len) * target_hz / static_cast<double>(clip.sample_rate_hz)));
  AudioClip out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(out_len);
  if (len == 0) return out;

  const double step = static_cast<double>(clip.sample_rate_hz) / target_hz;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto i0 = static_cast<std::size_t>(pos);
    if (i0 + 1 >= len) {
      out.samples[i] = clip.samples[len - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] = static_cast<float>((1.0 - frac) * clip.samples[i0] +
                                        frac * clip.samples[i0 + 1]);
  }
  return out;
}

AudioClip pad_circular_to(const AudioClip& clip, std::size_t n_samples) {
  require(!clip.samples.empty(), Errc::kEmptyInput, "pad_circular: empty clip");
  if (clip.samples.size() >= n_samples) return clip;
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(n_samples);
  const std::size_t len = clip.samples.size();
  for (std::size_t i = 0; i < n_samples; ++i) out.samples[i] = clip.samples[i % len];
  return out;
}

AudioClip pad_circular(const AudioClip& clip, double duration_s) {
  require(duration_s >= 0.0, Errc::kInvalidArgument, "pad_circular: negative duration");
  return pad_circular_to(
      clip, static_cast<std::size_t>(std::llround(duration_s * clip.sample_rate_hz)));
}

// ---------------------------------------------------------------------------
// Mel front-end

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(const FrontendConfig& cfg) {
  cfg.validate();
  n_bins_ = cfg.n_fft / 2 + 1;
  const double lo_mel = hz_to_mel(cfg.mel_fmin_hz);
  const double hi_mel = hz_to_mel(cfg.mel_fmax_hz);
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo_mel + (hi_mel - lo_mel) * static_cast<double>(i) /
                                      static_cast<double>(cfg.n_mels + 1));
  }
  const double bin_hz = static_cast<double>(cfg.sample_rate_hz) / cfg.n_fft;

  filters_.resize(static_cast<std::size_t>(cfg.n_mels));
  centers_hz_.resize(filters_.size());
  for (std::size_t m = 0; m < filters_.size(); ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    const double area = 2.0 / (hi - lo);
    centers_hz_[m] = center;
    Filter& filter = filters_[m];
    filter.first_bin = n_bins_;
    for (int k = 0; k < n_bins_; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f <= center) {
        w = (f - lo) / (center - lo);
      } else if (f > center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      if (w <= 0.0) {
        if (!filter.weights.empty()) break;
        continue;
      }
      if (filter.weights.empty()) filter.first_bin = k;
      filter.weights.push_back(w * area);
    }
  }
}

double MelFilterbank::weight(int band, int bin) const {
  const Filter& f = filters_.at(static_cast<std::size_t>(band));
  const int offset = bin - f.first_bin;
  if (offset < 0 || offset >= static_cast<int>(f.weights.size())) return 0.0;
  return f.weights[static_cast<std::size_t>(offset)];
}

void MelFilterbank::apply(std::span<const double> power, std::span<double> out) const {
  for (std::size_t m = 0; m < filters_.size(); ++m) {
    const Filter& f = filters_[m];
    double acc = 0.0;
    for (std::size_t j = 0; j < f.weights.size(); ++j) {
      acc += f.weights[j] * power[static_cast<std::size_t>(f.first_bin) + j];
    }
    out[m] = acc;
  }
}

MelFrontend::MelFrontend(FrontendConfig cfg) : cfg_(cfg), bank_(cfg_) {
  // periodic Hann
  window_.resize(static_cast<std::size_t>(cfg_.n_fft));
  for (int n = 0; n < cfg_.n_fft; ++n) {
    window_[static_cast<std::size_t>(n)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg_.n_fft);
  }
}

int MelFrontend::frame_count(std::size_t n_samples, const FrontendConfig& cfg) {
  if (n_samples < static_cast<std::size_t>(cfg.n_fft)) return 0;
  return 1 + static_cast<int>((n_samples - static_cast<std::size_t>(cfg.n_fft)) /
                              static_cast<std::size_t>(cfg.hop));
}

MelSpectrogram MelFrontend::operator()(std::span<const float> samples) const {
  const int n_frames = frame_count(samples.size(), cfg_);
  if (n_frames < 1) {
    fail(Errc::kFrameTooShort, "clip has " + std::to_string(samples.size()) +
                                   " samples, fewer than n_fft=" + std::to_string(cfg_.n_fft));
  }
  const auto n_fft = static_cast<std::size_t>(cfg_.n_fft);
  const auto n_bins = static_cast<std::size_t>(bank_.n_bins());

  MelSpectrogram spec(cfg_.n_mels, n_frames,
                      static_cast<double>(cfg_.hop) / cfg_.sample_rate_hz);
  Eigen::FFT<double> fft;
  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> bins;
  std::vector<double> power(n_bins);
  std::vector<double> mel(static_cast<std::size_t>(cfg_.n_mels));

  for (int t = 0; t < n_frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg_.hop);
    for (std::size_t i = 0; i < n_fft; ++i) frame[i] = samples[start + i] * window_[i];
    fft.fwd(bins, frame);
    for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(bins[k]);
    bank_.apply(power, mel);
    for (int m = 0; m < cfg_.n_mels; ++m) {
      spec.at(m, t) =
          static_cast<float>(std::log(mel[static_cast<std::size_t>(m)] + cfg_.log_epsilon));
    }
  }
  return spec;
}

MelSpectrogram MelFrontend::operator()(const AudioClip& clip) const {
  require(clip.sample_rate_hz == cfg_.sample_rate_hz, Errc::kInvalidArgument,
          "mel_spectrogram: clip rate " + std::to_string(clip.sample_rate_hz) +
              " differs from frontend rate " + std::to_string(cfg_.sample_rate_hz));
  return (*this)(std::span<const float>(clip.samples));
}

MelSpectrogram mel_spectrogram(const AudioClip& clip, const FrontendConfig& cfg) {
  return MelFrontend(cfg)(clip);
}

}  // namespace birdssl
