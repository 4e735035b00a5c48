// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "birdssl/audio.hpp"
#include "birdssl/manifest.hpp"
#include "birdssl/random.hpp"

namespace birdssl::tools {

/// Synthetic bird-call corpus: each class is a harmonic chirp song with its
/// own base frequency and frequency-modulation pattern, buried in pink noise.
struct SynthConfig {
  int n_train_classes = 12;
  int n_test_classes = 6;
  int files_per_class = 20;
  std::uint64_t seed = 0;
  int sample_rate_hz = 16000;
  double min_duration_s = 8.0;
  double max_duration_s = 15.0;
  double snr_min_db = 0.0;
  double snr_max_db = 10.0;
  /// The call is kept inside one chunk of this length.
  double chunk_s = 5.0;

  void validate() const;
};

enum class SweepPattern { kUp, kDown, kVibrato, kArch };

struct SynthClass {
  std::string label;
  double base_hz = 0.0;
  SweepPattern pattern = SweepPattern::kUp;
  double syllable_s = 0.1;
  double gap_s = 0.1;
  double modulation = 0.0;  // sweep depth, or vibrato rate in Hz
  Split split = Split::kTrain;
};

/// Classes ordered by base frequency (geometric, 500 to 6000 Hz). Test
/// classes are spread evenly through the range.
std::vector<SynthClass> synth_classes(const SynthConfig& cfg);

struct SynthClip {
  AudioClip audio;
  std::size_t event_start = 0;
  std::size_t event_length = 0;
  /// Fraction of the call inside each chunk.
  std::vector<double> chunk_presence;
};

SynthClip synth_clip(const SynthClass& cls, const SynthConfig& cfg, Rng& rng);

/// Writes audio/<label>/<label>_<i>.wav, a `.scores` file beside each WAV
/// and manifest.csv. Returns the manifest.
DatasetManifest write_synthetic_dataset(const std::filesystem::path& out_dir,
                                        const SynthConfig& cfg);

}  // namespace birdssl::tools
