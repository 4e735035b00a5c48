// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Little-endian scalar helpers shared by the binary dump and checkpoint
// formats.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "birdssl/error.hpp"

namespace birdssl::binary {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline void write_f32(std::ostream& out, float v) {
  std::uint32_t raw;
  std::memcpy(&raw, &v, sizeof raw);
  write_u32(out, raw);
}

inline std::uint32_t read_u32(std::istream& in, Errc on_eof, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    fail(on_eof, std::string("unexpected end of file reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float read_f32(std::istream& in, Errc on_eof, const char* what) {
  const std::uint32_t raw = read_u32(in, on_eof, what);
  float v;
  std::memcpy(&v, &raw, sizeof v);
  return v;
}

inline void expect_magic(std::istream& in, const char (&magic)[5], Errc code) {
  char got[4] = {};
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
    fail(code, std::string("bad magic, expected ") + magic);
  }
}

}  // namespace birdssl::binary
