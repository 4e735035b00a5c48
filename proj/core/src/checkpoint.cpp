// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/checkpoint.hpp"

#include <fstream>

#include "birdssl/binary_io.hpp"
#include "birdssl/error.hpp"

namespace birdssl {

namespace {

constexpr std::string_view kEncoderPrefix = "encoder.";

std::string header_text(const Checkpoint& ckpt) {
  KeyValues kv = ckpt.metadata;
  for (const auto& [k, v] : parse_key_values(ckpt.encoder.to_text())) {
    kv[std::string(kEncoderPrefix) + k] = v;
  }
  return format_key_values(kv);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  for (const auto& [k, v] : ckpt.metadata) {
    require(!k.starts_with(kEncoderPrefix), Errc::kInvalidArgument,
            "checkpoint metadata key collides with encoder namespace: " + k);
  }
  const Parameters<float> expected = Encoder<float>(ckpt.encoder).zero_parameters();
  require(expected.tensors.size() == ckpt.params.tensors.size(), Errc::kShapeMismatch,
          "checkpoint: parameter count does not match encoder config");
  for (std::size_t i = 0; i < expected.tensors.size(); ++i) {
    require(expected.tensors[i].shape == ckpt.params.tensors[i].shape, Errc::kShapeMismatch,
            "checkpoint: tensor " + std::to_string(i) + " shape does not match config");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::kIo, "cannot write checkpoint " + path.string());
  out.write("SSLB", 4);
  binary::write_u32(out, Checkpoint::kFormatVersion);
  const std::string header = header_text(ckpt);
  binary::write_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& t : ckpt.params.tensors) {
    binary::write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) binary::write_u32(out, static_cast<std::uint32_t>(d));
    for (float v : t.data) binary::write_f32(out, v);
  }
  if (!out) fail(Errc::kIo, "short write to " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kMissingFile, "cannot open checkpoint " + path.string());
  binary::expect_magic(in, "SSLB", Errc::kBadCheckpoint);
  const auto version = binary::read_u32(in, Errc::kBadCheckpoint, "checkpoint version");
  require(version == Checkpoint::kFormatVersion, Errc::kBadCheckpoint,
          "unsupported checkpoint version " + std::to_string(version));
  const auto header_len = binary::read_u32(in, Errc::kBadCheckpoint, "header length");
  std::string header(header_len, '\0');
  if (!in.read(header.data(), header_len)) fail(Errc::kBadCheckpoint, "truncated header");

  Checkpoint ckpt;
  std::string encoder_text;
  for (const auto& [k, v] : parse_key_values(header, "checkpoint header")) {
    if (k.starts_with(kEncoderPrefix)) {
      encoder_text += k.substr(kEncoderPrefix.size()) + "=" + v + "\n";
    } else {
      ckpt.metadata[k] = v;
    }
  }
  ckpt.encoder = EncoderConfig::from_text(encoder_text);
  ckpt.params = Encoder<float>(ckpt.encoder).zero_parameters();
  for (std::size_t i = 0; i < ckpt.params.tensors.size(); ++i) {
    auto& t = ckpt.params.tensors[i];
    const auto rank = binary::read_u32(in, Errc::kBadCheckpoint, "tensor rank");
    require(rank == t.shape.size(), Errc::kBadCheckpoint,
            "tensor " + std::to_string(i) + " rank mismatch");
    for (int d : t.shape) {
      const auto got = binary::read_u32(in, Errc::kBadCheckpoint, "tensor dims");
      require(got == static_cast<std::uint32_t>(d), Errc::kBadCheckpoint,
              "tensor " + std::to_string(i) + " shape mismatch");
    }
    for (float& v : t.data) v = binary::read_f32(in, Errc::kBadCheckpoint, "tensor data");
  }
  require(in.peek() == std::char_traits<char>::eof(), Errc::kBadCheckpoint,
          "trailing bytes after the last tensor");
  return ckpt;
}

}  // namespace birdssl
