// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "birdssl/audio.hpp"
#include "birdssl/encoder.hpp"
#include "birdssl/manifest.hpp"
#include "birdssl/random.hpp"
#include "birdssl/window_select.hpp"

namespace birdssl {

enum class EmbeddingStrategy { kChunkAverage, kActivationSelect };

std::string_view to_string(EmbeddingStrategy strategy);
EmbeddingStrategy parse_strategy(std::string_view name);

struct EvalConfig {
  int n_way = 5;
  int k_shot = 1;
  int n_query = 5;  // per class
  int n_tasks = 500;
  std::uint64_t seed = 0;
  EmbeddingStrategy strategy = EmbeddingStrategy::kChunkAverage;
  ScoreSource score_source = ScoreSource::kEnergy;

  void validate() const;
};

/// One file's embedding with its class.
struct LabeledEmbedding {
  Eigen::VectorXd embedding;
  int class_id = 0;
};

struct EpisodeItem {
  std::size_t file_index = 0;  // index into the embedding pool
  int class_id = 0;
};

struct Episode {
  std::vector<EpisodeItem> support;  // n_way * k_shot
  std::vector<EpisodeItem> query;    // n_way * n_query
};

struct Prototype {
  int class_id = 0;
  Eigen::VectorXd vector;
};

struct CenteredEpisode {
  std::vector<Prototype> prototypes;
  std::vector<Eigen::VectorXd> queries;
  /// Vectors that were exactly zero after centering and were left as is.
  int degenerate = 0;
};

struct EvalResult {
  double accuracy = 0.0;
  double ci95 = 0.0;
  std::vector<double> task_accuracies;
};

/// Mean of chunk embeddings, or the embedding of the best-scoring chunk.
Eigen::VectorXd clip_embedding(std::span<const Eigen::VectorXd> chunk_embeddings,
                               EmbeddingStrategy strategy,
                               std::span<const ActivationScore> scores = {});

/// Full path from audio: pad, chunk, encode (pre-projection), aggregate.
Eigen::VectorXd clip_embedding(const AudioClip& clip, const Encoder<float>& encoder,
                               const Parameters<float>& params, const MelFrontend& frontend,
                               EmbeddingStrategy strategy,
                               std::span<const ActivationScore> scores = {});

/// Classes uniform without replacement; per class k_shot + n_query files
/// without replacement, the first k_shot forming the support.
Episode sample_episode(std::span<const int> file_classes, const EvalConfig& cfg, Rng& rng);

/// Per-class mean of support embeddings, sorted by class id.
std::vector<Prototype> compute_prototypes(std::span<const EpisodeItem> support,
                                          std::span<const LabeledEmbedding> pool);

/// Subtracts the mean prototype from every prototype and query, then
/// l2-normalizes. A vector that is exactly zero after centering stays zero.
CenteredEpisode center_and_normalize(std::vector<Prototype> prototypes,
                                     std::vector<Eigen::VectorXd> queries);

/// Class of the Euclidean-nearest prototype; ties go to the lowest class id.
int classify(const Eigen::VectorXd& query, std::span<const Prototype> prototypes);

/// 1.96 * sample standard deviation / sqrt(n). Zero for n < 2.
double ci95_half_width(std::span<const double> values);

/// Episodic evaluation over a precomputed embedding pool. Task t draws from
/// its own stream derived from (seed, t), so results do not depend on
/// evaluation order.
EvalResult run_eval(std::span<const LabeledEmbedding> pool, const EvalConfig& cfg);

/// Embeds every test-split file of `manifest`, then evaluates.
EvalResult run_eval(const Encoder<float>& encoder, const Parameters<float>& params,
                    const DatasetManifest& manifest, const FrontendConfig& frontend,
                    const EvalConfig& cfg);

std::vector<LabeledEmbedding> embed_split(const Encoder<float>& encoder,
                                          const Parameters<float>& params,
                                          const DatasetManifest& manifest, Split split,
                                          const FrontendConfig& frontend,
                                          EmbeddingStrategy strategy, ScoreSource source);

}  // namespace birdssl
