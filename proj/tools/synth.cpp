// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "birdssl/error.hpp"
#include "birdssl/kv_text.hpp"
#include "birdssl/window_select.hpp"

namespace birdssl::tools {
namespace {

constexpr double kMinBaseHz = 500.0;
constexpr double kMaxBaseHz = 6000.0;
constexpr double kNyquistGuardHz = 7800.0;

/// Paul Kellet's pink filter on white Gaussian noise, scaled to unit RMS.
std::vector<double> pink_noise(std::size_t n, Rng& rng) {
  std::normal_distribution<double> white(0.0, 1.0);
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  std::vector<double> out(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = white(rng);
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    out[i] = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
    ss += out[i] * out[i];
  }
  const double rms = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(n, 1)));
  if (rms > 0.0) {
    for (double& v : out) v /= rms;
  }
  return out;
}

double instantaneous_hz(const SynthClass& cls, double base, double u, double t) {
  switch (cls.pattern) {
    case SweepPattern::kUp: return base * (1.0 + cls.modulation * u);
    case SweepPattern::kDown: return base * (1.0 + cls.modulation * (1.0 - u));
    case SweepPattern::kVibrato:
      return base * (1.0 + 0.06 * std::sin(2.0 * std::numbers::pi * cls.modulation * t));
    case SweepPattern::kArch:
      return base * (1.0 + cls.modulation * std::sin(std::numbers::pi * u));
  }
  return base;
}

/// Harmonic song of `length` samples starting at silence.
std::vector<double> song(const SynthClass& cls, double base_hz, double tempo, std::size_t length,
                         int rate) {
  std::vector<double> out(length, 0.0);
  const double syllable = cls.syllable_s * tempo * rate;
  const double period = (cls.syllable_s + cls.gap_s) * tempo * rate;
  double phase = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    const double pos = std::fmod(static_cast<double>(i), period);
    if (pos >= syllable) {
      phase = 0.0;
      continue;
    }
    const double u = pos / syllable;
    const double t = static_cast<double>(i) / rate;
    const double f = instantaneous_hz(cls, base_hz, u, t);
    phase += 2.0 * std::numbers::pi * f / rate;
    const double envelope = std::sin(std::numbers::pi * u);
    double v = std::sin(phase);
    if (2.0 * f < kNyquistGuardHz) v += 0.4 * std::sin(2.0 * phase);
    out[i] = envelope * envelope * v;
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  require(n_train_classes >= 1, Errc::kConfig, "synth: n_train_classes must be >= 1");
  require(n_test_classes >= 1, Errc::kConfig, "synth: n_test_classes must be >= 1");
  require(files_per_class >= 1, Errc::kConfig, "synth: files_per_class must be >= 1");
  require(sample_rate_hz >= 16000, Errc::kConfig, "synth: sample_rate_hz must be >= 16000");
  require(min_duration_s >= chunk_s && max_duration_s >= min_duration_s, Errc::kConfig,
          "synth: need chunk_s <= min_duration_s <= max_duration_s");
  require(snr_max_db >= snr_min_db, Errc::kConfig, "synth: snr_max_db < snr_min_db");
  require(chunk_s >= 2.5, Errc::kConfig, "synth: chunk_s must be >= 2.5 s");
}

std::vector<SynthClass> synth_classes(const SynthConfig& cfg) {
  cfg.validate();
  const int total = cfg.n_train_classes + cfg.n_test_classes;
  std::vector<SynthClass> classes(static_cast<std::size_t>(total));
  std::vector<bool> is_test(classes.size(), false);
  for (int j = 0; j < cfg.n_test_classes; ++j) {
    const auto k = static_cast<std::size_t>((j + 0.5) * total / cfg.n_test_classes);
    is_test[std::min(k, classes.size() - 1)] = true;
  }
  for (int k = 0; k < total; ++k) {
    SynthClass& c = classes[static_cast<std::size_t>(k)];
    Rng rng = make_rng(cfg.seed, {0xC1A55, static_cast<std::uint64_t>(k)});
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    char label[32];
    std::snprintf(label, sizeof label, "sp%02d", k);
    c.label = label;
    const double frac = total > 1 ? static_cast<double>(k) / (total - 1) : 0.0;
    c.base_hz = kMinBaseHz * std::pow(kMaxBaseHz / kMinBaseHz, frac);
    c.pattern = static_cast<SweepPattern>(k % 4);
    c.syllable_s = 0.06 + 0.14 * u01(rng);
    c.gap_s = 0.04 + 0.11 * u01(rng);
    c.modulation = c.pattern == SweepPattern::kVibrato ? 12.0 + 13.0 * u01(rng)
                                                       : 0.2 + 0.2 * u01(rng);
    // Keep the sweep below the guard band.
    if (c.pattern != SweepPattern::kVibrato) {
      c.modulation = std::min(c.modulation, kNyquistGuardHz / c.base_hz - 1.0);
    }
    c.split = is_test[static_cast<std::size_t>(k)] ? Split::kTest : Split::kTrain;
  }
  return classes;
}

SynthClip synth_clip(const SynthClass& cls, const SynthConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int rate = cfg.sample_rate_hz;
  const double duration = cfg.min_duration_s + (cfg.max_duration_s - cfg.min_duration_s) * u01(rng);
  const auto n = static_cast<std::size_t>(std::lround(duration * rate));
  const auto chunk = static_cast<std::size_t>(std::lround(cfg.chunk_s * rate));
  const std::size_t n_chunks = (n + chunk - 1) / chunk;

  const double event_s = 1.0 + 1.0 * u01(rng);
  const auto event_len = static_cast<std::size_t>(event_s * rate);
  const auto margin = static_cast<std::size_t>(0.1 * rate);
  std::vector<std::size_t> fits;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t valid = std::min(chunk, n - c * chunk);
    if (valid >= event_len + 2 * margin) fits.push_back(c);
  }
  require(!fits.empty(), Errc::kInvalidArgument, "synth: call does not fit in any chunk");
  const std::size_t host = fits[std::uniform_int_distribution<std::size_t>(0, fits.size() - 1)(rng)];
  const std::size_t valid = std::min(chunk, n - host * chunk);
  const std::size_t slack = valid - event_len - 2 * margin;
  const std::size_t start =
      host * chunk + margin + std::uniform_int_distribution<std::size_t>(0, slack)(rng);

  const double base = cls.base_hz * (1.0 + 0.03 * (2.0 * u01(rng) - 1.0));
  const double tempo = 1.0 + 0.1 * (2.0 * u01(rng) - 1.0);
  const double snr_db = cfg.snr_min_db + (cfg.snr_max_db - cfg.snr_min_db) * u01(rng);

  std::vector<double> noise = pink_noise(n, rng);
  const std::vector<double> call = song(cls, base, tempo, event_len, rate);
  double call_power = 0.0;
  for (double v : call) call_power += v * v;
  call_power /= static_cast<double>(event_len);
  const double gain = std::sqrt(std::pow(10.0, snr_db / 10.0) / call_power);

  std::vector<double> mixed = std::move(noise);
  for (std::size_t i = 0; i < event_len; ++i) mixed[start + i] += gain * call[i];
  double peak = 0.0;
  for (double v : mixed) peak = std::max(peak, std::abs(v));
  const double scale = 0.5 / peak;

  SynthClip out;
  out.audio.sample_rate_hz = rate;
  out.audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.audio.samples[i] = static_cast<float>(mixed[i] * scale);
  out.event_start = start;
  out.event_length = event_len;
  out.chunk_presence.assign(n_chunks, 0.0);
  out.chunk_presence[host] = 1.0;
  return out;
}

DatasetManifest write_synthetic_dataset(const std::filesystem::path& out_dir,
                                        const SynthConfig& cfg) {
  const std::vector<SynthClass> classes = synth_classes(cfg);
  DatasetManifest manifest;
  manifest.root = out_dir;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const SynthClass& cls = classes[k];
    const std::filesystem::path dir = out_dir / "audio" / cls.label;
    std::filesystem::create_directories(dir);
    for (int i = 0; i < cfg.files_per_class; ++i) {
      Rng rng = make_rng(cfg.seed, {0xF11E, k, static_cast<std::uint64_t>(i)});
      const SynthClip clip = synth_clip(cls, cfg, rng);
      char name[64];
      std::snprintf(name, sizeof name, "%s_%03d.wav", cls.label.c_str(), i);
      const std::filesystem::path wav = dir / name;
      write_wav(wav, clip.audio);
      std::ofstream scores(score_file_for(wav), std::ios::binary);
      for (double p : clip.chunk_presence) scores << format_double(p) << '\n';
      require(static_cast<bool>(scores), Errc::kIo, "cannot write " + score_file_for(wav).string());
      manifest.entries.push_back(ManifestEntry{
          (std::filesystem::path("audio") / cls.label / name).generic_string(), cls.label,
          cls.split});
    }
  }
  write_manifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace birdssl::tools
