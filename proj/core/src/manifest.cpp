// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/manifest.hpp"

#include <fstream>
#include <map>
#include <set>

#include "birdssl/error.hpp"

namespace birdssl {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  fail(Errc::kParse, "unknown split '" + std::string(name) + "' (train|val|test)");
}

std::vector<ManifestEntry> DatasetManifest::split(Split which) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == which) out.push_back(e);
  }
  return out;
}

void DatasetManifest::validate() const {
  std::set<std::string_view> seen;
  for (const auto& e : entries) {
    require(!e.path.empty(), Errc::kConfig, "manifest: empty path");
    require(seen.insert(e.path).second, Errc::kConfig, "manifest: duplicate path " + e.path);
  }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kMissingFile, "cannot open manifest " + path.string());
  DatasetManifest manifest;
  manifest.root = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "path,label,split") {
        fail(Errc::kParse, path.string() + ":1: expected header 'path,label,split'");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      fail(Errc::kParse, path.string() + ":" + std::to_string(line_no) +
                             ": expected exactly three comma-separated fields");
    }
    ManifestEntry e;
    e.path = line.substr(0, c1);
    e.label = line.substr(c1 + 1, c2 - c1 - 1);
    e.split = parse_split(line.substr(c2 + 1));
    manifest.entries.push_back(std::move(e));
  }
  if (line_no == 0) fail(Errc::kParse, path.string() + ": empty manifest");
  manifest.validate();
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  manifest.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::kIo, "cannot write manifest " + path.string());
  out << "path,label,split\n";
  for (const auto& e : manifest.entries) {
    require(e.path.find(',') == std::string::npos && e.label.find(',') == std::string::npos,
            Errc::kInvalidArgument, "manifest fields may not contain commas: " + e.path);
    out << e.path << ',' << e.label << ',' << to_string(e.split) << '\n';
  }
  if (!out) fail(Errc::kIo, "short write to " + path.string());
}

std::vector<int> label_ids(const std::vector<ManifestEntry>& entries) {
  std::map<std::string, int> ids;
  for (const auto& e : entries) ids.emplace(e.label, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  std::vector<int> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(ids.at(e.label));
  return out;
}

}  // namespace birdssl
