// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "birdssl/audio.hpp"

namespace birdssl {

// "MELS" | u32 F | u32 T | F*T f32, frequency-major. All little-endian.
void write_mels(const std::filesystem::path& path, const MelSpectrogram& spec);
MelSpectrogram read_mels(const std::filesystem::path& path);

struct EmbeddingDump {
  std::uint32_t n = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;             // n * dim, row-major
  std::vector<std::uint32_t> class_ids;  // n
};

// "EMBD" | u32 N | u32 D | N*D f32 | N u32 class ids. All little-endian.
void write_embeddings(const std::filesystem::path& path, const EmbeddingDump& dump);
EmbeddingDump read_embeddings(const std::filesystem::path& path);

}  // namespace birdssl
