// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "birdssl/error.hpp"
#include "birdssl/random.hpp"

namespace birdssl {

std::string_view to_string(Selection selection) {
  switch (selection) {
    case Selection::kTemporalProximity: return "temporal_proximity";
    case Selection::kActivation: return "activation";
  }
  return "unknown";
}

Selection parse_selection(std::string_view name) {
  if (name == "temporal_proximity" || name == "tp") return Selection::kTemporalProximity;
  if (name == "activation" || name == "ps") return Selection::kActivation;
  fail(Errc::kConfig,
       "unknown selection '" + std::string(name) + "' (temporal_proximity|activation)");
}

void TrainConfig::validate() const {
  require(batch_size >= 2, Errc::kConfig, "train.batch_size must be >= 2");
  require(learning_rate > 0.0, Errc::kConfig, "train.learning_rate must be > 0");
  require(weight_decay >= 0.0, Errc::kConfig, "train.weight_decay must be >= 0");
  require(epochs >= 1, Errc::kConfig, "train.epochs must be >= 1");
  require(min_overlap >= 0.0 && min_overlap < 1.0, Errc::kConfig,
          "train.min_overlap must be in [0, 1)");
  objective_cfg.validate();
}

AdamWConfig TrainConfig::adamw() const {
  AdamWConfig cfg;
  cfg.learning_rate = learning_rate;
  cfg.weight_decay = weight_decay;
  return cfg;
}

std::vector<TrainingClip> load_training_clips(const DatasetManifest& manifest,
                                              const FrontendConfig& frontend,
                                              const TrainConfig& cfg) {
  const auto entries = manifest.split(Split::kTrain);
  require(!entries.empty(), Errc::kInsufficientData, "manifest has no train entries");
  if (cfg.objective == Objective::kSupCon) {
    for (const auto& e : entries) {
      require(!e.label.empty(), Errc::kConfig,
              "supcon needs labels, but train entry " + e.path + " is unlabeled");
    }
  }
  const std::vector<int> labels = label_ids(entries);
  const MelFrontend mel(frontend);
  const std::size_t window = frontend.window_samples();

  std::vector<TrainingClip> clips;
  clips.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    TrainingClip clip;
    clip.path = manifest.resolve(entries[i]);
    clip.label = labels[i];
    try {
      clip.audio = resample(load_wav(clip.path), frontend.sample_rate_hz);
      clip.audio.validate();
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (while loading " + clip.path.string() + ")");
    }
    if (cfg.selection == Selection::kActivation) {
      auto chunks = chunk_spectrograms(clip.audio, mel);
      const auto scores = chunk_scores(chunks, cfg.score_source, clip.path);
      clip.selected = std::move(chunks[static_cast<std::size_t>(select_by_activation(scores))]);
    }
    clip.audio = pad_circular_to(clip.audio, window);
    clips.push_back(std::move(clip));
  }
  return clips;
}

TrainResult train(const std::vector<TrainingClip>& clips, const TrainerSetup& setup,
                  const EpochCallback& on_epoch) {
  const TrainConfig& cfg = setup.train;
  cfg.validate();
  setup.augment.validate();
  setup.frontend.validate();
  require(clips.size() >= static_cast<std::size_t>(cfg.batch_size), Errc::kInsufficientData,
          "training needs at least batch_size=" + std::to_string(cfg.batch_size) +
              " clips, have " + std::to_string(clips.size()));

  const MelFrontend mel(setup.frontend);
  const Encoder<float> encoder(setup.encoder);
  ParameterState<float> state = ParameterState<float>::from(encoder.init_parameters(cfg.seed));
  const AdamWConfig adamw = cfg.adamw();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t n_batches = clips.size() / batch;

  TrainResult result;
  std::vector<std::size_t> order(clips.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(cfg.seed, {1, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      std::vector<MelSpectrogram> first(batch), second(batch);
      std::vector<int> labels(batch);
      for (std::size_t i = 0; i < batch; ++i) {
        const TrainingClip& clip = clips[order[b * batch + i]];
        labels[i] = clip.label;
        if (clip.selected) {
          first[i] = *clip.selected;
          second[i] = *clip.selected;
        } else {
          Rng rng = make_rng(cfg.seed, {2, static_cast<std::uint64_t>(epoch), b, i});
          const auto [w1, w2] = temporal_proximity_pair(clip.audio, setup.frontend.window_s,
                                                        cfg.min_overlap, rng);
          first[i] = mel(extract(clip.audio, w1));
          second[i] = mel(extract(clip.audio, w2));
        }
      }

      const int dim = setup.encoder.output_dim();
      Eigen::MatrixXd z1(static_cast<Eigen::Index>(batch), dim);
      Eigen::MatrixXd z2(static_cast<Eigen::Index>(batch), dim);
      std::vector<Encoder<float>::Cache> cache1(batch), cache2(batch);
      for (std::size_t i = 0; i < batch; ++i) {
        Rng rng = make_rng(cfg.seed, {3, static_cast<std::uint64_t>(epoch), b, i});
        const auto [v1, v2] = make_views(first[i], second[i], first, setup.augment, rng);
        const auto row = static_cast<Eigen::Index>(i);
        z1.row(row) = encoder.forward(v1, state.values, &cache1[i]).head.cast<double>().transpose();
        z2.row(row) = encoder.forward(v2, state.values, &cache2[i]).head.cast<double>().transpose();
      }

      const LossOutput loss = evaluate_objective(cfg.objective, z1, z2, labels, cfg.objective_cfg);
      if (!std::isfinite(loss.value)) {
        fail(Errc::kNonFinite, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(b));
      }
      loss_sum += loss.value;

      std::vector<Tensor<float>> grads;
      for (const auto& t : state.values.tensors) grads.push_back(Tensor<float>::zeros(t.shape));
      for (std::size_t i = 0; i < batch; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const Vector<float> g1 = loss.grad_z1.row(row).transpose().cast<float>();
        const Vector<float> g2 = loss.grad_z2->row(row).transpose().cast<float>();
        encoder.backward(g1, cache1[i], state.values, grads);
        encoder.backward(g2, cache2[i], state.values, grads);
      }
      adamw_step<float>(state, grads, adamw);
    }

    const auto t1 = std::chrono::steady_clock::now();
    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / static_cast<double>(n_batches);
    entry.seconds = std::chrono::duration<double>(t1 - t0).count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  result.params = std::move(state.values);
  return result;
}

TrainResult train(const DatasetManifest& manifest, const TrainerSetup& setup,
                  const EpochCallback& on_epoch) {
  setup.train.validate();
  return train(load_training_clips(manifest, setup.frontend, setup.train), setup, on_epoch);
}

}  // namespace birdssl
