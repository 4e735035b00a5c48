// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "birdssl/audio.hpp"
#include "birdssl/augment.hpp"
#include "birdssl/encoder.hpp"
#include "birdssl/manifest.hpp"
#include "birdssl/objectives.hpp"
#include "birdssl/window_select.hpp"

namespace birdssl {

enum class Selection { kTemporalProximity, kActivation };

std::string_view to_string(Selection selection);
Selection parse_selection(std::string_view name);

struct TrainConfig {
  int batch_size = 64;
  double learning_rate = 1e-3;
  double weight_decay = 1e-6;
  int epochs = 20;
  Objective objective = Objective::kBarlowTwins;
  ObjectiveConfig objective_cfg;
  std::uint64_t seed = 0;
  Selection selection = Selection::kTemporalProximity;
  double min_overlap = 0.6;
  ScoreSource score_source = ScoreSource::kEnergy;

  void validate() const;
  AdamWConfig adamw() const;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Parameters<float> params;
  std::vector<EpochLog> log;
};

/// A decoded training clip at the front-end sample rate, padded to at
/// least one window.
struct TrainingClip {
  std::filesystem::path path;
  int label = 0;
  AudioClip audio;
  /// Selected window spectrogram when Selection::kActivation is used.
  std::optional<MelSpectrogram> selected;
};

/// Decodes, resamples and pads the train split. Fails fast naming the
/// offending path.
std::vector<TrainingClip> load_training_clips(const DatasetManifest& manifest,
                                              const FrontendConfig& frontend,
                                              const TrainConfig& cfg);

struct TrainerSetup {
  TrainConfig train;
  EncoderConfig encoder;
  FrontendConfig frontend;
  AugmentConfig augment;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Per epoch: seeded shuffle, full batches only, two windows and two
/// augmented views per example, encoder + projector forward, objective,
/// backward, one AdamW step per batch. Deterministic given the seed.
TrainResult train(const std::vector<TrainingClip>& clips, const TrainerSetup& setup,
                  const EpochCallback& on_epoch = {});

TrainResult train(const DatasetManifest& manifest, const TrainerSetup& setup,
                  const EpochCallback& on_epoch = {});

}  // namespace birdssl
