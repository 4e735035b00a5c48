// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "birdssl/encoder.hpp"
#include "birdssl/kv_text.hpp"

namespace birdssl {

/// Binary layout, little-endian:
///   "SSLB" | u32 version | u32 header_len | header text |
///   per tensor in declaration order: u32 rank | rank x u32 dims | f32 data
/// The header is canonical `key=value` text: the encoder config under
/// `encoder.*` plus free-form provenance keys (frontend settings, objective).
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  EncoderConfig encoder;
  KeyValues metadata;  // keys must not start with "encoder."
  Parameters<float> params;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace birdssl
