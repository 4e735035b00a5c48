// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "birdssl/audio.hpp"
#include "birdssl/random.hpp"

namespace birdssl {

enum class MaskFill { kMean, kZero };

struct AugmentConfig {
  double mix_coeff_min = 0.6;
  double mix_coeff_max = 1.0;
  int sa_blocks = 3;
  int sa_freq_width = 30;
  int sa_time_width = 10;
  MaskFill mask_fill = MaskFill::kMean;
  bool time_shift = true;
  bool mix = true;
  bool spec_augment = true;

  void validate() const;
};

/// out[f, t] = in[f, (t - shift) mod T]
MelSpectrogram time_shift(const MelSpectrogram& spec, long shift);

/// coeff * a + (1 - coeff) * b, elementwise. coeff = 1 returns `a` bitwise,
/// and a == b returns `a` bitwise for any coeff.
MelSpectrogram mix(const MelSpectrogram& a, const MelSpectrogram& b, double coeff);

struct MaskBlock {
  enum class Axis { kFrequency, kTime } axis;
  int start = 0;
  int width = 0;
};

/// Draws `sa_blocks` frequency blocks then `sa_blocks` time blocks with
/// uniform start positions. Blocks may overlap.
std::vector<MaskBlock> sample_mask_blocks(int n_mels, int n_frames, const AugmentConfig& cfg,
                                          Rng& rng);
void apply_mask(MelSpectrogram& spec, std::span<const MaskBlock> blocks, float fill);

MelSpectrogram spec_augment(const MelSpectrogram& spec, const AugmentConfig& cfg, Rng& rng);

/// Two views, each through time shift -> mix with a pool partner ->
/// SpecAugment with independent draws. The first view consumes the stream
/// before the second.
std::pair<MelSpectrogram, MelSpectrogram> make_views(
    const MelSpectrogram& spec1, const MelSpectrogram& spec2,
    std::span<const MelSpectrogram> batch_pool, const AugmentConfig& cfg, Rng& rng);

}  // namespace birdssl
