// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/augment.hpp"

#include <string>

#include "birdssl/error.hpp"

namespace birdssl {

void AugmentConfig::validate() const {
  require(0.0 <= mix_coeff_min && mix_coeff_min <= mix_coeff_max && mix_coeff_max <= 1.0,
          Errc::kInvalidArgument, "augment: need 0 <= mix_coeff_min <= mix_coeff_max <= 1");
  require(sa_blocks >= 0 && sa_freq_width >= 0 && sa_time_width >= 0, Errc::kInvalidArgument,
          "augment: SpecAugment block count and widths must be non-negative");
}

MelSpectrogram time_shift(const MelSpectrogram& spec, long shift) {
  const long n = spec.n_frames();
  MelSpectrogram out = spec;
  if (n == 0) return out;
  const long s = ((shift % n) + n) % n;
  for (int f = 0; f < spec.n_mels(); ++f) {
    const auto in = spec.row(f);
    auto dst = out.row(f);
    for (long t = 0; t < n; ++t) dst[static_cast<std::size_t>((t + s) % n)] = in[static_cast<std::size_t>(t)];
  }
  return out;
}

MelSpectrogram mix(const MelSpectrogram& a, const MelSpectrogram& b, double coeff) {
  require(a.same_shape(b), Errc::kShapeMismatch, "mix: spectrogram shapes differ");
  require(coeff >= 0.0 && coeff <= 1.0, Errc::kInvalidArgument, "mix: coeff outside [0, 1]");
  if (coeff == 1.0) return a;
  MelSpectrogram out = b;
  const auto c = static_cast<float>(coeff);
  auto& dst = out.values();
  const auto& av = a.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += c * (av[i] - dst[i]);
  return out;
}

std::vector<MaskBlock> sample_mask_blocks(int n_mels, int n_frames, const AugmentConfig& cfg,
                                          Rng& rng) {
  std::vector<MaskBlock> blocks;
  if (cfg.sa_blocks == 0) return blocks;
  require(cfg.sa_freq_width <= n_mels && cfg.sa_time_width <= n_frames,
          Errc::kInvalidArgument,
          "spec_augment: block width exceeds spectrogram extent (" +
              std::to_string(n_mels) + "x" + std::to_string(n_frames) + ")");
  blocks.reserve(static_cast<std::size_t>(2 * cfg.sa_blocks));
  std::uniform_int_distribution<int> freq_start(0, n_mels - cfg.sa_freq_width);
  for (int i = 0; i < cfg.sa_blocks; ++i) {
    blocks.push_back({MaskBlock::Axis::kFrequency, freq_start(rng), cfg.sa_freq_width});
  }
  std::uniform_int_distribution<int> time_start(0, n_frames - cfg.sa_time_width);
  for (int i = 0; i < cfg.sa_blocks; ++i) {
    blocks.push_back({MaskBlock::Axis::kTime, time_start(rng), cfg.sa_time_width});
  }
  return blocks;
}

void apply_mask(MelSpectrogram& spec, std::span<const MaskBlock> blocks, float fill) {
  for (const MaskBlock& b : blocks) {
    if (b.axis == MaskBlock::Axis::kFrequency) {
      for (int f = b.start; f < b.start + b.width; ++f) {
        for (float& v : spec.row(f)) v = fill;
      }
    } else {
      for (int f = 0; f < spec.n_mels(); ++f) {
        auto row = spec.row(f);
        for (int t = b.start; t < b.start + b.width; ++t) row[static_cast<std::size_t>(t)] = fill;
      }
    }
  }
}

MelSpectrogram spec_augment(const MelSpectrogram& spec, const AugmentConfig& cfg, Rng& rng) {
  const auto blocks = sample_mask_blocks(spec.n_mels(), spec.n_frames(), cfg, rng);
  MelSpectrogram out = spec;
  if (blocks.empty()) return out;
  const float fill = cfg.mask_fill == MaskFill::kMean ? static_cast<float>(spec.mean()) : 0.0f;
  apply_mask(out, blocks, fill);
  return out;
}

namespace {

MelSpectrogram one_view(const MelSpectrogram& spec, std::span<const MelSpectrogram> pool,
                        const AugmentConfig& cfg, Rng& rng) {
  MelSpectrogram view = spec;
  if (cfg.time_shift) {
    std::uniform_int_distribution<long> shift(0, spec.n_frames() - 1);
    view = time_shift(view, shift(rng));
  }
  if (cfg.mix) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const MelSpectrogram& partner = pool[pick(rng)];
    std::uniform_real_distribution<double> coeff(cfg.mix_coeff_min, cfg.mix_coeff_max);
    // uniform_real_distribution is half-open; an empty range yields min.
    const double c = cfg.mix_coeff_min == cfg.mix_coeff_max ? cfg.mix_coeff_min : coeff(rng);
    view = mix(view, partner, c);
  }
  if (cfg.spec_augment) view = spec_augment(view, cfg, rng);
  return view;
}

}  // namespace

std::pair<MelSpectrogram, MelSpectrogram> make_views(
    const MelSpectrogram& spec1, const MelSpectrogram& spec2,
    std::span<const MelSpectrogram> batch_pool, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  require(spec1.same_shape(spec2), Errc::kShapeMismatch, "make_views: view shapes differ");
  if (cfg.mix) {
    require(!batch_pool.empty(), Errc::kEmptyInput, "make_views: mixing needs a non-empty pool");
  }
  MelSpectrogram v1 = one_view(spec1, batch_pool, cfg, rng);
  MelSpectrogram v2 = one_view(spec2, batch_pool, cfg, rng);
  return {std::move(v1), std::move(v2)};
}

}  // namespace birdssl
