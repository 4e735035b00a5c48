// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "birdssl/error.hpp"
#include "birdssl/fewshot.hpp"
#include "run_config.hpp"
#include "synth.hpp"

namespace birdssl::tools {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Maps an error to kExitValidation (bad config, flags or inputs detected
/// before work starts) or kExitRuntime.
int exit_code_for(Errc code);

DatasetManifest cmd_synth_data(const std::filesystem::path& out_dir, const SynthConfig& cfg,
                               std::ostream& out);

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
  /// Write the untrained (seeded) initialization instead of training.
  bool init_only = false;
};

/// Writes <out>/encoder.sslb and <out>/train.log (epoch, loss, seconds).
void cmd_train(const TrainOptions& opts, std::ostream& out);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> manifest;  // overrides data.manifest
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
  std::optional<int> n_way, k_shot, n_query, n_tasks;
  std::optional<std::string> strategy, score_source;
  bool dump_embeddings = false;
};

/// Writes <out>/results.txt and optionally <out>/embeddings.embd.
EvalResult cmd_eval(const EvalOptions& opts, std::ostream& out);

struct GradCheckOptions {
  std::string objective = "all";
  int n = 8;
  int d = 16;
  std::uint64_t seed = 0;
  double h = 1e-5;
  double tolerance = 1e-4;
  /// Corrupts one analytic gradient entry so the check must fail.
  bool inject_fault = false;
};

/// Returns kExitOk when every checked objective is within tolerance.
int cmd_grad_check(const GradCheckOptions& opts, std::ostream& out);

struct AugmentPreviewOptions {
  std::filesystem::path audio;
  std::optional<std::filesystem::path> config;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

/// Writes input.mels, shift.mels, mix.mels (mixed with itself) and
/// mask.mels for the first window of the clip.
void cmd_augment_preview(const AugmentPreviewOptions& opts, std::ostream& out);

}  // namespace birdssl::tools
