// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "birdssl/error.hpp"

namespace birdssl {

std::string_view to_string(EmbeddingStrategy strategy) {
  switch (strategy) {
    case EmbeddingStrategy::kChunkAverage: return "chunk_average";
    case EmbeddingStrategy::kActivationSelect: return "activation_select";
  }
  return "unknown";
}

EmbeddingStrategy parse_strategy(std::string_view name) {
  if (name == "chunk_average") return EmbeddingStrategy::kChunkAverage;
  if (name == "activation_select") return EmbeddingStrategy::kActivationSelect;
  fail(Errc::kConfig,
       "unknown embedding strategy '" + std::string(name) + "' (chunk_average|activation_select)");
}

void EvalConfig::validate() const {
  require(n_way >= 2, Errc::kConfig, "eval.n_way must be >= 2");
  require(k_shot >= 1, Errc::kConfig, "eval.k_shot must be >= 1");
  require(n_query >= 1, Errc::kConfig, "eval.n_query must be >= 1");
  require(n_tasks >= 1, Errc::kConfig, "eval.n_tasks must be >= 1");
}

Eigen::VectorXd clip_embedding(std::span<const Eigen::VectorXd> chunk_embeddings,
                               EmbeddingStrategy strategy,
                               std::span<const ActivationScore> scores) {
  require(!chunk_embeddings.empty(), Errc::kEmptyInput, "clip_embedding: no chunks");
  if (strategy == EmbeddingStrategy::kActivationSelect) {
    require(scores.size() == chunk_embeddings.size(), Errc::kCountMismatch,
            "clip_embedding: need one score per chunk");
    const int best = select_by_activation(scores);
    require(best >= 0 && static_cast<std::size_t>(best) < chunk_embeddings.size(),
            Errc::kInvalidArgument, "clip_embedding: score index out of range");
    return chunk_embeddings[static_cast<std::size_t>(best)];
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(chunk_embeddings.front().size());
  for (const auto& e : chunk_embeddings) sum += e;
  return sum / static_cast<double>(chunk_embeddings.size());
}

namespace {

Eigen::VectorXd embed_chunks(std::span<const MelSpectrogram> chunks,
                             const Encoder<float>& encoder, const Parameters<float>& params,
                             EmbeddingStrategy strategy,
                             std::span<const ActivationScore> scores) {
  std::vector<ActivationScore> energy;
  if (strategy == EmbeddingStrategy::kActivationSelect && scores.empty()) {
    energy = chunk_scores(chunks, ScoreSource::kEnergy, {});
    scores = energy;
  }
  const int selected =
      strategy == EmbeddingStrategy::kActivationSelect ? select_by_activation(scores) : -1;
  std::vector<Eigen::VectorXd> embeddings(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    // activation_select only needs the winning chunk
    if (selected >= 0 && static_cast<int>(i) != selected) continue;
    embeddings[i] = encoder.forward(chunks[i], params, nullptr, /*use_projector=*/false)
                        .embedding.cast<double>();
  }
  return clip_embedding(embeddings, strategy, scores);
}

}  // namespace

Eigen::VectorXd clip_embedding(const AudioClip& clip, const Encoder<float>& encoder,
                               const Parameters<float>& params, const MelFrontend& frontend,
                               EmbeddingStrategy strategy,
                               std::span<const ActivationScore> scores) {
  const auto chunks = chunk_spectrograms(clip, frontend);
  return embed_chunks(chunks, encoder, params, strategy, scores);
}

Episode sample_episode(std::span<const int> file_classes, const EvalConfig& cfg, Rng& rng) {
  cfg.validate();
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < file_classes.size(); ++i) by_class[file_classes[i]].push_back(i);

  const auto per_class = static_cast<std::size_t>(cfg.k_shot + cfg.n_query);
  std::vector<int> eligible;
  for (const auto& [cls, files] : by_class) {
    if (files.size() >= per_class) eligible.push_back(cls);
  }
  if (eligible.size() < static_cast<std::size_t>(cfg.n_way)) {
    fail(Errc::kInsufficientData,
         std::to_string(cfg.n_way) + "-way tasks need " + std::to_string(cfg.n_way) +
             " classes with at least " + std::to_string(per_class) + " files each; " +
             std::to_string(eligible.size()) + " available (of " +
             std::to_string(by_class.size()) + " classes)");
  }

  // Partial Fisher-Yates draws: uniform subsets without replacement.
  auto draw = [&rng](auto& items, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
      std::swap(items[i], items[pick(rng)]);
    }
  };
  draw(eligible, static_cast<std::size_t>(cfg.n_way));

  Episode episode;
  for (int w = 0; w < cfg.n_way; ++w) {
    const int cls = eligible[static_cast<std::size_t>(w)];
    std::vector<std::size_t> files = by_class[cls];
    draw(files, per_class);
    for (std::size_t j = 0; j < per_class; ++j) {
      auto& dst = j < static_cast<std::size_t>(cfg.k_shot) ? episode.support : episode.query;
      dst.push_back(EpisodeItem{files[j], cls});
    }
  }
  return episode;
}

std::vector<Prototype> compute_prototypes(std::span<const EpisodeItem> support,
                                          std::span<const LabeledEmbedding> pool) {
  std::map<int, std::pair<Eigen::VectorXd, int>> sums;
  for (const EpisodeItem& item : support) {
    require(item.file_index < pool.size(), Errc::kInvalidArgument,
            "support item outside the embedding pool");
    const Eigen::VectorXd& e = pool[item.file_index].embedding;
    auto [it, inserted] = sums.try_emplace(item.class_id, Eigen::VectorXd::Zero(e.size()), 0);
    it->second.first += e;
    it->second.second += 1;
  }
  std::vector<Prototype> out;
  out.reserve(sums.size());
  for (auto& [cls, acc] : sums) {
    out.push_back(Prototype{cls, acc.first / static_cast<double>(acc.second)});
  }
  return out;
}

CenteredEpisode center_and_normalize(std::vector<Prototype> prototypes,
                                     std::vector<Eigen::VectorXd> queries) {
  require(!prototypes.empty(), Errc::kEmptyInput, "center_and_normalize: no prototypes");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(prototypes.front().vector.size());
  for (const auto& p : prototypes) mean += p.vector;
  mean /= static_cast<double>(prototypes.size());

  CenteredEpisode out;
  auto normalize = [&](Eigen::VectorXd& v) {
    v -= mean;
    const double n = v.norm();
    if (n > 0.0) {
      v /= n;
    } else {
      ++out.degenerate;
    }
  };
  for (auto& p : prototypes) normalize(p.vector);
  for (auto& q : queries) normalize(q);
  out.prototypes = std::move(prototypes);
  out.queries = std::move(queries);
  return out;
}

int classify(const Eigen::VectorXd& query, std::span<const Prototype> prototypes) {
  require(!prototypes.empty(), Errc::kEmptyInput, "classify: no prototypes");
  int best_class = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const Prototype& p : prototypes) {
    require(p.vector.size() == query.size(), Errc::kShapeMismatch,
            "classify: prototype dimension differs from query");
    const double d = (query - p.vector).squaredNorm();
    if (d < best || (d == best && p.class_id < best_class)) {
      best = d;
      best_class = p.class_id;
    }
  }
  return best_class;
}

double ci95_half_width(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(n));
}

EvalResult run_eval(std::span<const LabeledEmbedding> pool, const EvalConfig& cfg) {
  cfg.validate();
  std::vector<int> classes;
  classes.reserve(pool.size());
  for (const auto& e : pool) classes.push_back(e.class_id);

  EvalResult result;
  result.task_accuracies.reserve(static_cast<std::size_t>(cfg.n_tasks));
  for (int t = 0; t < cfg.n_tasks; ++t) {
    Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(t)});
    const Episode episode = sample_episode(classes, cfg, rng);
    std::vector<Eigen::VectorXd> queries;
    queries.reserve(episode.query.size());
    for (const auto& q : episode.query) queries.push_back(pool[q.file_index].embedding);
    const CenteredEpisode centered =
        center_and_normalize(compute_prototypes(episode.support, pool), std::move(queries));
    int correct = 0;
    for (std::size_t i = 0; i < centered.queries.size(); ++i) {
      if (classify(centered.queries[i], centered.prototypes) == episode.query[i].class_id) {
        ++correct;
      }
    }
    result.task_accuracies.push_back(static_cast<double>(correct) /
                                     static_cast<double>(centered.queries.size()));
  }
  double sum = 0.0;
  for (double a : result.task_accuracies) sum += a;
  result.accuracy = sum / static_cast<double>(result.task_accuracies.size());
  result.ci95 = ci95_half_width(result.task_accuracies);
  return result;
}

std::vector<LabeledEmbedding> embed_split(const Encoder<float>& encoder,
                                          const Parameters<float>& params,
                                          const DatasetManifest& manifest, Split split,
                                          const FrontendConfig& frontend,
                                          EmbeddingStrategy strategy, ScoreSource source) {
  const auto entries = manifest.split(split);
  const std::vector<int> ids = label_ids(entries);
  const MelFrontend mel(frontend);
  std::vector<LabeledEmbedding> pool;
  pool.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto path = manifest.resolve(entries[i]);
    AudioClip clip = resample(load_wav(path), frontend.sample_rate_hz);
    clip.validate();
    const auto chunks = chunk_spectrograms(clip, mel);
    std::vector<ActivationScore> scores;
    if (strategy == EmbeddingStrategy::kActivationSelect) {
      scores = chunk_scores(chunks, source, path);
    }
    pool.push_back(
        LabeledEmbedding{embed_chunks(chunks, encoder, params, strategy, scores), ids[i]});
  }
  return pool;
}

EvalResult run_eval(const Encoder<float>& encoder, const Parameters<float>& params,
                    const DatasetManifest& manifest, const FrontendConfig& frontend,
                    const EvalConfig& cfg) {
  cfg.validate();
  const auto pool = embed_split(encoder, params, manifest, Split::kTest, frontend, cfg.strategy,
                                cfg.score_source);
  return run_eval(pool, cfg);
}

}  // namespace birdssl
