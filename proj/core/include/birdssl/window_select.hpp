// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "birdssl/audio.hpp"
#include "birdssl/random.hpp"

namespace birdssl {

/// A span of samples inside the clip it was produced from. `valid_samples`
/// is the part backed by real audio; the remainder (final chunk only) is
/// filled by circular padding on extraction.
struct Window {
  std::size_t start_sample = 0;
  std::size_t length_samples = 0;
  std::size_t valid_samples = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

struct ActivationScore {
  int window_index = 0;
  double score = 0.0;
};

/// Samples two equal-length windows whose overlap is at least
/// `min_overlap` of the window length. The first start is uniform over all
/// positions; the second is uniform over the positions that satisfy the
/// overlap bound.
std::pair<Window, Window> temporal_proximity_pair(const AudioClip& clip, double window_s,
                                                  double min_overlap, Rng& rng);

double overlap_fraction(const Window& a, const Window& b);

/// Consecutive non-overlapping windows; count = ceil(len / window length).
std::vector<Window> chunk(const AudioClip& clip, double window_s);

/// Copies the window out of `clip`, circularly padding a partial window.
AudioClip extract(const AudioClip& clip, const Window& window);

/// Built-in stand-in for a pretrained tagger: mean log-mel energy.
ActivationScore energy_score(const MelSpectrogram& spec, int window_index = 0);

/// One finite decimal per line, order-aligned with chunk().
std::vector<ActivationScore> load_external_scores(const std::filesystem::path& path,
                                                  std::size_t expected_count);

/// Index of the highest score; the lowest index wins ties.
int select_by_activation(std::span<const ActivationScore> scores);

/// Where per-chunk activation scores come from: the built-in energy scorer
/// or a score file stored next to the audio as `<audio path>.scores`.
enum class ScoreSource { kEnergy, kFile };

std::filesystem::path score_file_for(const std::filesystem::path& audio_path);

/// Log-mel spectrogram of every chunk(clip, cfg.window_s); a clip shorter
/// than one window yields its circularly padded self.
std::vector<MelSpectrogram> chunk_spectrograms(const AudioClip& clip, const MelFrontend& frontend);

std::vector<ActivationScore> chunk_scores(std::span<const MelSpectrogram> chunks,
                                          ScoreSource source,
                                          const std::filesystem::path& audio_path);

}  // namespace birdssl
