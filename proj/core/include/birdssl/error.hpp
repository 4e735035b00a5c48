// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace birdssl {

enum class Errc {
  kInvalidArgument,
  kMissingFile,
  kMalformedHeader,
  kUnsupportedEncoding,
  kIo,
  kShapeMismatch,
  kFrameTooShort,
  kZeroNorm,
  kZeroVariance,
  kNonFinite,
  kEmptyPositiveSet,
  kEmptyInput,
  kCountMismatch,
  kParse,
  kInsufficientData,
  kStaleCache,
  kConfig,
  kBadCheckpoint,
};

std::string_view to_string(Errc code);

/// All library failures are reported through this type; `code()` tells
/// callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace birdssl
