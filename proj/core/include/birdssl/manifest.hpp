// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace birdssl {

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string path;   // relative to the manifest's directory
  std::string label;  // may be empty for unlabeled audio
  Split split = Split::kTrain;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// CSV with header `path,label,split`.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path root;  // directory relative paths resolve against

  std::vector<ManifestEntry> split(Split which) const;
  std::filesystem::path resolve(const ManifestEntry& entry) const { return root / entry.path; }
  /// Throws kConfig on duplicate paths.
  void validate() const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Maps label strings to dense ids in sorted label order.
std::vector<int> label_ids(const std::vector<ManifestEntry>& entries);

}  // namespace birdssl
