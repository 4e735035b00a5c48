// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "birdssl/error.hpp"
#include "commands.hpp"

namespace {

using namespace birdssl;
using namespace birdssl::tools;

template <typename T>
std::optional<T> opt_if(const CLI::Option* option, const T& value) {
  return option->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"birdssl: self-supervised bioacoustic representation lab"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  std::uint64_t seed = 0;
  std::string out = "out";
  auto* config_opt = app.add_option("--config", config, "run config (key=value)")
                         ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output directory");
  config_opt->configurable(false);

  SynthConfig synth;
  auto* synth_cmd = app.add_subcommand("synth-data", "generate the synthetic chirp corpus");
  synth_cmd->add_option("--n-train-classes", synth.n_train_classes)->capture_default_str();
  synth_cmd->add_option("--n-test-classes", synth.n_test_classes)->capture_default_str();
  synth_cmd->add_option("--files-per-class", synth.files_per_class)->capture_default_str();

  bool init_only = false;
  auto* train_cmd = app.add_subcommand("train", "train an encoder from --config");
  train_cmd->add_flag("--init-only", init_only, "write the seeded initialization untrained");

  EvalOptions eval;
  std::string checkpoint, manifest, strategy, score_source;
  int n_way = 0, k_shot = 0, n_query = 0, n_tasks = 0;
  auto* eval_cmd = app.add_subcommand("eval", "episodic few-shot evaluation");
  eval_cmd->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  auto* manifest_opt = eval_cmd->add_option("--manifest", manifest);
  auto* n_way_opt = eval_cmd->add_option("--n-way", n_way);
  auto* k_shot_opt = eval_cmd->add_option("--k-shot", k_shot);
  auto* n_query_opt = eval_cmd->add_option("--n-query", n_query);
  auto* n_tasks_opt = eval_cmd->add_option("--n-tasks", n_tasks);
  auto* strategy_opt = eval_cmd->add_option("--strategy", strategy, "chunk_average|activation_select");
  auto* source_opt = eval_cmd->add_option("--score-source", score_source, "energy|file");
  eval_cmd->add_flag("--dump-embeddings", eval.dump_embeddings);

  GradCheckOptions grad;
  auto* grad_cmd = app.add_subcommand("grad-check", "finite-difference gradient check");
  grad_cmd->set_help_flag("--help", "print this help message and exit");
  grad_cmd->add_option("--objective", grad.objective, "simclr|bt|frossl|supcon|all")
      ->capture_default_str();
  grad_cmd->add_option("--n", grad.n)->capture_default_str();
  grad_cmd->add_option("--d", grad.d)->capture_default_str();
  grad_cmd->add_option("--h", grad.h)->capture_default_str();
  grad_cmd->add_flag("--inject-fault", grad.inject_fault, "corrupt one gradient entry");

  std::string audio;
  auto* preview_cmd = app.add_subcommand("augment-preview", "dump each augmentation stage");
  preview_cmd->add_option("audio", audio, "WAV file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::optional<std::filesystem::path> config_path =
      config_opt->count() > 0 ? std::optional<std::filesystem::path>(config) : std::nullopt;
  const std::optional<std::uint64_t> seed_override = opt_if(seed_opt, seed);

  try {
    if (*synth_cmd) {
      if (seed_override) synth.seed = *seed_override;
      cmd_synth_data(out, synth, std::cout);
    } else if (*train_cmd) {
      if (!config_path) {
        std::cerr << "error: train requires --config\n";
        return kExitValidation;
      }
      cmd_train(TrainOptions{*config_path, seed_override, out, init_only}, std::cout);
    } else if (*eval_cmd) {
      eval.checkpoint = checkpoint;
      eval.config = config_path;
      eval.seed = seed_override;
      eval.out_dir = out;
      if (manifest_opt->count() > 0) eval.manifest = manifest;
      eval.n_way = opt_if(n_way_opt, n_way);
      eval.k_shot = opt_if(k_shot_opt, k_shot);
      eval.n_query = opt_if(n_query_opt, n_query);
      eval.n_tasks = opt_if(n_tasks_opt, n_tasks);
      eval.strategy = opt_if(strategy_opt, strategy);
      eval.score_source = opt_if(source_opt, score_source);
      cmd_eval(eval, std::cout);
    } else if (*grad_cmd) {
      if (seed_override) grad.seed = *seed_override;
      return cmd_grad_check(grad, std::cout);
    } else if (*preview_cmd) {
      cmd_augment_preview(
          AugmentPreviewOptions{audio, config_path, seed_override.value_or(0), out}, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
