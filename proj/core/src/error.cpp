// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/error.hpp"

namespace birdssl {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kMissingFile: return "missing file";
    case Errc::kMalformedHeader: return "malformed header";
    case Errc::kUnsupportedEncoding: return "unsupported encoding";
    case Errc::kIo: return "i/o error";
    case Errc::kShapeMismatch: return "shape mismatch";
    case Errc::kFrameTooShort: return "clip shorter than one frame";
    case Errc::kZeroNorm: return "zero norm";
    case Errc::kZeroVariance: return "zero variance";
    case Errc::kNonFinite: return "non-finite value";
    case Errc::kEmptyPositiveSet: return "empty positive set";
    case Errc::kEmptyInput: return "empty input";
    case Errc::kCountMismatch: return "count mismatch";
    case Errc::kParse: return "parse error";
    case Errc::kInsufficientData: return "insufficient data";
    case Errc::kStaleCache: return "stale cache";
    case Errc::kConfig: return "configuration error";
    case Errc::kBadCheckpoint: return "bad checkpoint";
  }
  return "unknown";
}

}  // namespace birdssl
