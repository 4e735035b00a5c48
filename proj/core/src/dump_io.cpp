// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/dump_io.hpp"

#include <fstream>

#include "birdssl/binary_io.hpp"
#include "birdssl/error.hpp"

namespace birdssl {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::kIo, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kMissingFile, "cannot open " + path.string());
  return in;
}

}  // namespace

void write_mels(const std::filesystem::path& path, const MelSpectrogram& spec) {
  auto out = open_out(path);
  out.write("MELS", 4);
  binary::write_u32(out, static_cast<std::uint32_t>(spec.n_mels()));
  binary::write_u32(out, static_cast<std::uint32_t>(spec.n_frames()));
  for (float v : spec.values()) binary::write_f32(out, v);
  if (!out) fail(Errc::kIo, "short write to " + path.string());
}

MelSpectrogram read_mels(const std::filesystem::path& path) {
  auto in = open_in(path);
  binary::expect_magic(in, "MELS", Errc::kMalformedHeader);
  const auto f = binary::read_u32(in, Errc::kMalformedHeader, "MELS rows");
  const auto t = binary::read_u32(in, Errc::kMalformedHeader, "MELS columns");
  require(f > 0 && t > 0, Errc::kMalformedHeader, "MELS dump with empty shape");
  MelSpectrogram spec(static_cast<int>(f), static_cast<int>(t));
  for (float& v : spec.values()) v = binary::read_f32(in, Errc::kMalformedHeader, "MELS data");
  return spec;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingDump& dump) {
  require(dump.values.size() == static_cast<std::size_t>(dump.n) * dump.dim &&
              dump.class_ids.size() == dump.n,
          Errc::kShapeMismatch, "embedding dump sizes disagree with header");
  auto out = open_out(path);
  out.write("EMBD", 4);
  binary::write_u32(out, dump.n);
  binary::write_u32(out, dump.dim);
  for (float v : dump.values) binary::write_f32(out, v);
  for (std::uint32_t id : dump.class_ids) binary::write_u32(out, id);
  if (!out) fail(Errc::kIo, "short write to " + path.string());
}

EmbeddingDump read_embeddings(const std::filesystem::path& path) {
  auto in = open_in(path);
  binary::expect_magic(in, "EMBD", Errc::kMalformedHeader);
  EmbeddingDump dump;
  dump.n = binary::read_u32(in, Errc::kMalformedHeader, "EMBD count");
  dump.dim = binary::read_u32(in, Errc::kMalformedHeader, "EMBD dimension");
  dump.values.resize(static_cast<std::size_t>(dump.n) * dump.dim);
  for (float& v : dump.values) v = binary::read_f32(in, Errc::kMalformedHeader, "EMBD data");
  dump.class_ids.resize(dump.n);
  for (auto& id : dump.class_ids) id = binary::read_u32(in, Errc::kMalformedHeader, "EMBD ids");
  return dump;
}

}  // namespace birdssl
