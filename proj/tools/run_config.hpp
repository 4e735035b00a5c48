// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "birdssl/audio.hpp"
#include "birdssl/augment.hpp"
#include "birdssl/encoder.hpp"
#include "birdssl/fewshot.hpp"
#include "birdssl/kv_text.hpp"
#include "birdssl/trainer.hpp"

namespace birdssl::tools {

/// Everything a run needs, read from flat dotted `key=value` text:
///   data.manifest            (path, relative to the config file)
///   frontend.*  augment.*  objective.*  encoder.*  train.*  eval.*
/// Unknown keys are rejected.
struct RunConfig {
  std::optional<std::filesystem::path> manifest;
  FrontendConfig frontend;
  AugmentConfig augment;
  EncoderConfig encoder;
  TrainConfig train;
  EvalConfig eval;
  bool has_objective = false;

  /// Checks every component invariant.
  void validate() const;
};

/// `required` lists keys that must be present (error names the first missing one).
RunConfig parse_run_config(const KeyValues& kv, const std::filesystem::path& base_dir,
                           std::initializer_list<std::string_view> required = {});
RunConfig load_run_config(const std::filesystem::path& path,
                          std::initializer_list<std::string_view> required = {});

/// frontend.* keys in canonical form (stored in checkpoint headers).
KeyValues frontend_to_kv(const FrontendConfig& cfg);
FrontendConfig frontend_from_kv(const KeyValues& kv);

}  // namespace birdssl::tools
