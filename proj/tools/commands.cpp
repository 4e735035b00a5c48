// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "birdssl/checkpoint.hpp"
#include "birdssl/dump_io.hpp"
#include "birdssl/error.hpp"
#include "birdssl/objectives.hpp"
#include "birdssl/trainer.hpp"

namespace birdssl::tools {
namespace {

namespace fs = std::filesystem;

constexpr const char* kCheckpointName = "encoder.sslb";
constexpr const char* kTrainLogName = "train.log";
constexpr const char* kResultsName = "results.txt";
constexpr const char* kEmbeddingsName = "embeddings.embd";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  require(static_cast<bool>(f), Errc::kIo, "cannot write " + path.string());
}

std::string scientific(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

DatasetManifest load_manifest_checked(const fs::path& path) {
  DatasetManifest manifest = read_manifest(path);
  manifest.validate();
  return manifest;
}

void check_train_inputs(const DatasetManifest& manifest, const TrainConfig& cfg) {
  const auto entries = manifest.split(Split::kTrain);
  require(!entries.empty(), Errc::kConfig, "manifest has no train entries");
  if (cfg.objective == Objective::kSupCon) {
    for (const auto& e : entries) {
      require(!e.label.empty(), Errc::kConfig,
              "objective supcon needs labels; unlabeled train entry " + e.path);
    }
  }
  for (const auto& e : entries) {
    require(fs::exists(manifest.resolve(e)), Errc::kMissingFile,
            "missing audio file " + manifest.resolve(e).string());
  }
}

void check_eval_inputs(const DatasetManifest& manifest, const EvalConfig& cfg) {
  std::map<std::string, int> counts;
  for (const auto& e : manifest.split(Split::kTest)) {
    require(!e.label.empty(), Errc::kConfig, "unlabeled test entry " + e.path);
    ++counts[e.label];
  }
  const int per_class = cfg.k_shot + cfg.n_query;
  int eligible = 0;
  for (const auto& [label, n] : counts) eligible += n >= per_class ? 1 : 0;
  if (eligible < cfg.n_way) {
    fail(Errc::kInsufficientData,
         "insufficient classes: " + std::to_string(cfg.n_way) + "-way " +
             std::to_string(cfg.k_shot) + "-shot with " + std::to_string(cfg.n_query) +
             " queries requires " + std::to_string(cfg.n_way) + " test classes with >= " +
             std::to_string(per_class) + " files, available " + std::to_string(eligible) +
             " (of " + std::to_string(counts.size()) + " test classes)");
  }
}

std::string metadata_or(const KeyValues& kv, std::string_view key, std::string fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

}  // namespace

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kConfig:
    case Errc::kInvalidArgument:
    case Errc::kParse:
    case Errc::kInsufficientData:
    case Errc::kMissingFile:
    case Errc::kEmptyPositiveSet:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

DatasetManifest cmd_synth_data(const fs::path& out_dir, const SynthConfig& cfg,
                               std::ostream& out) {
  cfg.validate();
  const DatasetManifest manifest = write_synthetic_dataset(out_dir, cfg);
  out << "wrote " << manifest.entries.size() << " files ("
      << cfg.n_train_classes << " train classes, " << cfg.n_test_classes
      << " test classes) to " << (out_dir / "manifest.csv").string() << '\n';
  return manifest;
}

void cmd_train(const TrainOptions& opts, std::ostream& out) {
  RunConfig cfg = load_run_config(opts.config, {"data.manifest", "train.objective"});
  if (opts.seed) cfg.train.seed = *opts.seed;
  cfg.validate();
  const DatasetManifest manifest = load_manifest_checked(*cfg.manifest);
  check_train_inputs(manifest, cfg.train);

  const TrainerSetup setup{cfg.train, cfg.encoder, cfg.frontend, cfg.augment};
  Checkpoint ckpt;
  ckpt.encoder = cfg.encoder;
  ckpt.metadata = frontend_to_kv(cfg.frontend);
  ckpt.metadata["train.objective"] = std::string(to_string(cfg.train.objective));
  ckpt.metadata["train.selection"] = std::string(to_string(cfg.train.selection));
  ckpt.metadata["train.seed"] = std::to_string(cfg.train.seed);
  ckpt.metadata["train.epochs"] = opts.init_only ? "0" : std::to_string(cfg.train.epochs);

  std::string log = "epoch\tloss\tseconds\n";
  if (opts.init_only) {
    ckpt.params = Encoder<float>(cfg.encoder).init_parameters(cfg.train.seed);
    fs::create_directories(opts.out_dir);
  } else {
    const std::vector<TrainingClip> clips =
        load_training_clips(manifest, cfg.frontend, cfg.train);
    fs::create_directories(opts.out_dir);
    TrainResult result = train(clips, setup, [&](const EpochLog& e) {
      char line[96];
      std::snprintf(line, sizeof line, "%d\t%.17g\t%.3f\n", e.epoch, e.mean_loss, e.seconds);
      out << line << std::flush;
      log += line;
    });
    ckpt.params = std::move(result.params);
  }
  write_checkpoint(opts.out_dir / kCheckpointName, ckpt);
  write_text(opts.out_dir / kTrainLogName, log);
  out << "checkpoint " << (opts.out_dir / kCheckpointName).string() << '\n';
}

EvalResult cmd_eval(const EvalOptions& opts, std::ostream& out) {
  RunConfig cfg;
  if (opts.config) cfg = load_run_config(*opts.config);
  EvalConfig& ev = cfg.eval;
  if (opts.seed) ev.seed = *opts.seed;
  if (opts.n_way) ev.n_way = *opts.n_way;
  if (opts.k_shot) ev.k_shot = *opts.k_shot;
  if (opts.n_query) ev.n_query = *opts.n_query;
  if (opts.n_tasks) ev.n_tasks = *opts.n_tasks;
  if (opts.strategy) ev.strategy = parse_strategy(*opts.strategy);
  if (opts.score_source) {
    KeyValues kv{{"eval.score_source", *opts.score_source}};
    ev.score_source = parse_run_config(kv, {}).eval.score_source;
  }
  ev.validate();

  const fs::path manifest_path = opts.manifest ? *opts.manifest
                                 : cfg.manifest ? *cfg.manifest
                                                : fs::path();
  require(!manifest_path.empty(), Errc::kConfig,
          "missing required key 'data.manifest' (or --manifest)");
  const DatasetManifest manifest = load_manifest_checked(manifest_path);
  check_eval_inputs(manifest, ev);
  const Checkpoint ckpt = read_checkpoint(opts.checkpoint);
  const FrontendConfig frontend = frontend_from_kv(ckpt.metadata);

  const Encoder<float> encoder(ckpt.encoder);
  const auto pool = embed_split(encoder, ckpt.params, manifest, Split::kTest, frontend,
                                ev.strategy, ev.score_source);
  const EvalResult result = run_eval(pool, ev);

  KeyValues kv;
  kv["objective"] = metadata_or(ckpt.metadata, "train.objective", "unknown");
  kv["selection"] = metadata_or(ckpt.metadata, "train.selection", "unknown");
  kv["train_epochs"] = metadata_or(ckpt.metadata, "train.epochs", "unknown");
  kv["strategy"] = std::string(to_string(ev.strategy));
  kv["n_way"] = std::to_string(ev.n_way);
  kv["k_shot"] = std::to_string(ev.k_shot);
  kv["n_query"] = std::to_string(ev.n_query);
  kv["n_tasks"] = std::to_string(ev.n_tasks);
  kv["seed"] = std::to_string(ev.seed);
  kv["accuracy"] = format_double(result.accuracy);
  kv["ci95"] = format_double(result.ci95);

  fs::create_directories(opts.out_dir);
  write_text(opts.out_dir / kResultsName, format_key_values(kv));
  if (opts.dump_embeddings) {
    EmbeddingDump dump;
    dump.n = static_cast<std::uint32_t>(pool.size());
    dump.dim = pool.empty() ? 0 : static_cast<std::uint32_t>(pool.front().embedding.size());
    for (const auto& e : pool) {
      for (double v : e.embedding) dump.values.push_back(static_cast<float>(v));
      dump.class_ids.push_back(static_cast<std::uint32_t>(e.class_id));
    }
    write_embeddings(opts.out_dir / kEmbeddingsName, dump);
  }
  char line[128];
  std::snprintf(line, sizeof line, "accuracy %.2f%% +/- %.2f%% (%d-way %d-shot, %d tasks)\n",
                100.0 * result.accuracy, 100.0 * result.ci95, ev.n_way, ev.k_shot, ev.n_tasks);
  out << line;
  return result;
}

int cmd_grad_check(const GradCheckOptions& opts, std::ostream& out) {
  require(opts.n >= 2, Errc::kInvalidArgument, "--n must be >= 2");
  require(opts.d >= 1, Errc::kInvalidArgument, "--d must be >= 1");
  require(opts.h > 0.0, Errc::kInvalidArgument, "--h must be positive");
  std::vector<Objective> objectives;
  if (opts.objective == "all") {
    objectives = {Objective::kSimClr, Objective::kBarlowTwins, Objective::kFroSsl,
                  Objective::kSupCon};
  } else {
    objectives = {parse_objective(opts.objective)};
  }

  bool ok = true;
  for (Objective objective : objectives) {
    Rng rng = make_rng(opts.seed, {static_cast<std::uint64_t>(objective)});
    std::normal_distribution<double> normal(0.0, 1.0);
    EmbeddingBatch z1(opts.n, opts.d), z2(opts.n, opts.d);
    for (Eigen::Index i = 0; i < z1.size(); ++i) z1.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < z2.size(); ++i) z2.data()[i] = normal(rng);
    std::vector<int> labels(static_cast<std::size_t>(opts.n));
    for (int i = 0; i < opts.n; ++i) labels[static_cast<std::size_t>(i)] = i % std::max(1, opts.n / 2);

    const ObjectiveConfig cfg;
    const TwoViewLoss loss = [&](const EmbeddingBatch& a, const EmbeddingBatch& b) {
      LossOutput o = evaluate_objective(objective, a, b, labels, cfg);
      if (opts.inject_fault) o.grad_z1(0, 0) += 1.0;
      return o;
    };
    const double err = finite_difference_check(loss, z1, z2, opts.h);
    const bool pass = err < opts.tolerance;
    ok = ok && pass;
    out << to_string(objective) << " max_rel_error " << scientific(err)
        << (pass ? " ok" : " FAIL") << '\n';
  }
  return ok ? kExitOk : kExitValidation;
}

void cmd_augment_preview(const AugmentPreviewOptions& opts, std::ostream& out) {
  RunConfig cfg;
  if (opts.config) cfg = load_run_config(*opts.config);
  AudioClip clip = resample(load_wav(opts.audio), cfg.frontend.sample_rate_hz);
  clip.validate();
  clip = pad_circular(clip, cfg.frontend.window_s);

  const MelFrontend frontend(cfg.frontend);
  const MelSpectrogram input = chunk_spectrograms(clip, frontend).front();
  Rng rng = make_rng(opts.seed);
  const long frames = static_cast<long>(input.n_frames());
  const long shift = std::uniform_int_distribution<long>(0, frames - 1)(rng);
  const MelSpectrogram shifted = time_shift(input, shift);
  const double coeff = std::uniform_real_distribution<double>(cfg.augment.mix_coeff_min,
                                                              cfg.augment.mix_coeff_max)(rng);
  const MelSpectrogram mixed = mix(shifted, shifted, coeff);
  const MelSpectrogram masked = spec_augment(mixed, cfg.augment, rng);

  fs::create_directories(opts.out_dir);
  write_mels(opts.out_dir / "input.mels", input);
  write_mels(opts.out_dir / "shift.mels", shifted);
  write_mels(opts.out_dir / "mix.mels", mixed);
  write_mels(opts.out_dir / "mask.mels", masked);
  out << "shift " << shift << " frames, mix coefficient " << format_double(coeff) << ", wrote "
      << input.n_mels() << "x" << input.n_frames() << " spectrograms to " << opts.out_dir.string()
      << '\n';
}

}  // namespace birdssl::tools
