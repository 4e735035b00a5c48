// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/window_select.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "birdssl/error.hpp"

namespace birdssl {

namespace {

std::size_t window_length(const AudioClip& clip, double window_s) {
  require(window_s > 0.0, Errc::kInvalidArgument, "window length must be positive");
  const auto len = static_cast<std::size_t>(std::llround(window_s * clip.sample_rate_hz));
  require(len > 0, Errc::kInvalidArgument, "window shorter than one sample");
  return len;
}

}  // namespace

std::pair<Window, Window> temporal_proximity_pair(const AudioClip& clip, double window_s,
                                                  double min_overlap, Rng& rng) {
  require(min_overlap >= 0.0 && min_overlap < 1.0, Errc::kInvalidArgument,
          "min_overlap must be in [0, 1)");
  const std::size_t len = window_length(clip, window_s);
  require(clip.size() >= len, Errc::kInvalidArgument,
          "clip shorter than the window; pad before selecting");

  const std::size_t last_start = clip.size() - len;
  // Largest start offset that still keeps overlap >= min_overlap. Without an
  // overlap bound every position qualifies.
  auto max_shift = min_overlap == 0.0 ? last_start : static_cast<std::size_t>(
      std::floor((1.0 - min_overlap) * static_cast<double>(len)));
  while (max_shift > 0 &&
         static_cast<double>(len - max_shift) < min_overlap * static_cast<double>(len)) {
    --max_shift;
  }

  std::uniform_int_distribution<std::size_t> first(0, last_start);
  const std::size_t s1 = first(rng);
  const std::size_t lo = s1 >= max_shift ? s1 - max_shift : 0;
  const std::size_t hi = std::min(last_start, s1 + max_shift);
  std::uniform_int_distribution<std::size_t> second(lo, hi);
  const std::size_t s2 = second(rng);
  return {Window{s1, len, len}, Window{s2, len, len}};
}

double overlap_fraction(const Window& a, const Window& b) {
  const std::size_t begin = std::max(a.start_sample, b.start_sample);
  const std::size_t end = std::min(a.start_sample + a.length_samples,
                                   b.start_sample + b.length_samples);
  if (end <= begin || a.length_samples == 0) return 0.0;
  return static_cast<double>(end - begin) / static_cast<double>(a.length_samples);
}

std::vector<Window> chunk(const AudioClip& clip, double window_s) {
  require(!clip.samples.empty(), Errc::kEmptyInput, "chunk: empty clip");
  const std::size_t len = window_length(clip, window_s);
  const std::size_t count = (clip.size() + len - 1) / len;
  std::vector<Window> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * len;
    out.push_back(Window{start, len, std::min(len, clip.size() - start)});
  }
  return out;
}

AudioClip extract(const AudioClip& clip, const Window& window) {
  require(window.valid_samples > 0 && window.valid_samples <= window.length_samples &&
              window.start_sample + window.valid_samples <= clip.size(),
          Errc::kInvalidArgument, "window does not fit the clip");
  AudioClip part;
  part.sample_rate_hz = clip.sample_rate_hz;
  const auto first = clip.samples.begin() + static_cast<std::ptrdiff_t>(window.start_sample);
  part.samples.assign(first, first + static_cast<std::ptrdiff_t>(window.valid_samples));
  return pad_circular_to(part, window.length_samples);
}

ActivationScore energy_score(const MelSpectrogram& spec, int window_index) {
  return ActivationScore{window_index, spec.mean()};
}

std::vector<ActivationScore> load_external_scores(const std::filesystem::path& path,
                                                  std::size_t expected_count) {
  std::ifstream in(path);
  if (!in) fail(Errc::kMissingFile, "cannot open score file " + path.string());
  std::vector<ActivationScore> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    double value = 0.0;
    const char* begin = line.data();
    const char* end = begin + line.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (begin == end || ec != std::errc() || ptr != end || !std::isfinite(value)) {
      fail(Errc::kParse, path.string() + ":" + std::to_string(line_no) +
                             ": not a finite decimal: '" + line + "'");
    }
    scores.push_back(ActivationScore{static_cast<int>(scores.size()), value});
  }
  if (scores.size() != expected_count) {
    fail(Errc::kCountMismatch, path.string() + ": expected " + std::to_string(expected_count) +
                                   " scores, found " + std::to_string(scores.size()));
  }
  return scores;
}

int select_by_activation(std::span<const ActivationScore> scores) {
  require(!scores.empty(), Errc::kEmptyInput, "select_by_activation: no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].score > scores[best].score) best = i;
  }
  return scores[best].window_index;
}

std::filesystem::path score_file_for(const std::filesystem::path& audio_path) {
  std::filesystem::path p = audio_path;
  p += ".scores";
  return p;
}

std::vector<MelSpectrogram> chunk_spectrograms(const AudioClip& clip,
                                               const MelFrontend& frontend) {
  const FrontendConfig& cfg = frontend.config();
  std::vector<MelSpectrogram> out;
  for (const Window& w : chunk(clip, cfg.window_s)) out.push_back(frontend(extract(clip, w)));
  return out;
}

std::vector<ActivationScore> chunk_scores(std::span<const MelSpectrogram> chunks,
                                          ScoreSource source,
                                          const std::filesystem::path& audio_path) {
  if (source == ScoreSource::kFile) {
    return load_external_scores(score_file_for(audio_path), chunks.size());
  }
  std::vector<ActivationScore> scores;
  scores.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    scores.push_back(energy_score(chunks[i], static_cast<int>(i)));
  }
  return scores;
}

}  // namespace birdssl
