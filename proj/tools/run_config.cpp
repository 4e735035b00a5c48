// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "birdssl/error.hpp"

namespace birdssl::tools {
namespace {

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

std::uint64_t parse_seed(std::string_view key, std::string_view value) {
  const int v = parse_int(key, value);
  require(v >= 0, Errc::kConfig, std::string(key) + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

ScoreSource parse_score_source(std::string_view key, std::string_view value) {
  if (value == "energy") return ScoreSource::kEnergy;
  if (value == "file") return ScoreSource::kFile;
  fail(Errc::kConfig, std::string(key) + ": expected energy|file, got '" + std::string(value) + "'");
}

MaskFill parse_mask_fill(std::string_view key, std::string_view value) {
  if (value == "mean") return MaskFill::kMean;
  if (value == "zero") return MaskFill::kZero;
  fail(Errc::kConfig, std::string(key) + ": expected mean|zero, got '" + std::string(value) + "'");
}

template <typename F>
auto in_key(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    if (e.code() == Errc::kConfig) throw;
    fail(Errc::kConfig, key + ": " + e.what());
  }
}

const std::map<std::string, Setter, std::less<>>& setters() {
  using K = const std::string&;
  static const std::map<std::string, Setter, std::less<>> table = {
      {"frontend.sample_rate_hz", [](RunConfig& c, K k, K v) { c.frontend.sample_rate_hz = parse_int(k, v); }},
      {"frontend.n_fft", [](RunConfig& c, K k, K v) { c.frontend.n_fft = parse_int(k, v); }},
      {"frontend.hop", [](RunConfig& c, K k, K v) { c.frontend.hop = parse_int(k, v); }},
      {"frontend.n_mels", [](RunConfig& c, K k, K v) { c.frontend.n_mels = parse_int(k, v); }},
      {"frontend.window_s", [](RunConfig& c, K k, K v) { c.frontend.window_s = parse_double(k, v); }},
      {"frontend.log_epsilon", [](RunConfig& c, K k, K v) { c.frontend.log_epsilon = parse_double(k, v); }},
      {"frontend.mel_fmin_hz", [](RunConfig& c, K k, K v) { c.frontend.mel_fmin_hz = parse_double(k, v); }},
      {"frontend.mel_fmax_hz", [](RunConfig& c, K k, K v) { c.frontend.mel_fmax_hz = parse_double(k, v); }},

      {"augment.mix_coeff_min", [](RunConfig& c, K k, K v) { c.augment.mix_coeff_min = parse_double(k, v); }},
      {"augment.mix_coeff_max", [](RunConfig& c, K k, K v) { c.augment.mix_coeff_max = parse_double(k, v); }},
      {"augment.sa_blocks", [](RunConfig& c, K k, K v) { c.augment.sa_blocks = parse_int(k, v); }},
      {"augment.sa_freq_width", [](RunConfig& c, K k, K v) { c.augment.sa_freq_width = parse_int(k, v); }},
      {"augment.sa_time_width", [](RunConfig& c, K k, K v) { c.augment.sa_time_width = parse_int(k, v); }},
      {"augment.mask_fill", [](RunConfig& c, K k, K v) { c.augment.mask_fill = parse_mask_fill(k, v); }},
      {"augment.time_shift", [](RunConfig& c, K k, K v) { c.augment.time_shift = parse_bool(k, v); }},
      {"augment.mix", [](RunConfig& c, K k, K v) { c.augment.mix = parse_bool(k, v); }},
      {"augment.spec_augment", [](RunConfig& c, K k, K v) { c.augment.spec_augment = parse_bool(k, v); }},

      {"objective.temperature", [](RunConfig& c, K k, K v) { c.train.objective_cfg.temperature = parse_double(k, v); }},
      {"objective.lambda", [](RunConfig& c, K k, K v) { c.train.objective_cfg.lambda = parse_double(k, v); }},
      {"objective.robust_norm", [](RunConfig& c, K k, K v) { c.train.objective_cfg.robust_norm = parse_bool(k, v); }},

      {"encoder.stages", [](RunConfig& c, K, K v) { c.encoder.stages = EncoderConfig::from_text("stages=" + v).stages; }},
      {"encoder.embedding_dim", [](RunConfig& c, K k, K v) { c.encoder.embedding_dim = parse_int(k, v); }},
      {"encoder.projector_dims", [](RunConfig& c, K k, K v) { c.encoder.projector_dims = parse_int_list(k, v); }},
      {"encoder.activation", [](RunConfig& c, K k, K v) { c.encoder.activation = in_key(k, [&] { return parse_activation(v); }); }},
      {"encoder.standardize_input", [](RunConfig& c, K k, K v) { c.encoder.standardize_input = parse_bool(k, v); }},

      {"train.batch_size", [](RunConfig& c, K k, K v) { c.train.batch_size = parse_int(k, v); }},
      {"train.learning_rate", [](RunConfig& c, K k, K v) { c.train.learning_rate = parse_double(k, v); }},
      {"train.weight_decay", [](RunConfig& c, K k, K v) { c.train.weight_decay = parse_double(k, v); }},
      {"train.epochs", [](RunConfig& c, K k, K v) { c.train.epochs = parse_int(k, v); }},
      {"train.objective", [](RunConfig& c, K k, K v) {
         c.train.objective = in_key(k, [&] { return parse_objective(v); });
         c.has_objective = true;
       }},
      {"train.seed", [](RunConfig& c, K k, K v) { c.train.seed = parse_seed(k, v); }},
      {"train.selection", [](RunConfig& c, K k, K v) { c.train.selection = in_key(k, [&] { return parse_selection(v); }); }},
      {"train.min_overlap", [](RunConfig& c, K k, K v) { c.train.min_overlap = parse_double(k, v); }},
      {"train.score_source", [](RunConfig& c, K k, K v) { c.train.score_source = parse_score_source(k, v); }},

      {"eval.n_way", [](RunConfig& c, K k, K v) { c.eval.n_way = parse_int(k, v); }},
      {"eval.k_shot", [](RunConfig& c, K k, K v) { c.eval.k_shot = parse_int(k, v); }},
      {"eval.n_query", [](RunConfig& c, K k, K v) { c.eval.n_query = parse_int(k, v); }},
      {"eval.n_tasks", [](RunConfig& c, K k, K v) { c.eval.n_tasks = parse_int(k, v); }},
      {"eval.seed", [](RunConfig& c, K k, K v) { c.eval.seed = parse_seed(k, v); }},
      {"eval.strategy", [](RunConfig& c, K k, K v) { c.eval.strategy = in_key(k, [&] { return parse_strategy(v); }); }},
      {"eval.score_source", [](RunConfig& c, K k, K v) { c.eval.score_source = parse_score_source(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  frontend.validate();
  augment.validate();
  encoder.validate();
  train.validate();
  eval.validate();
}

RunConfig parse_run_config(const KeyValues& kv, const std::filesystem::path& base_dir,
                           std::initializer_list<std::string_view> required) {
  for (std::string_view key : required) {
    if (kv.find(key) == kv.end()) {
      fail(Errc::kConfig, "missing required key '" + std::string(key) + "'");
    }
  }
  RunConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "data.manifest") {
      require(!value.empty(), Errc::kConfig, "data.manifest is empty");
      const std::filesystem::path p(value);
      cfg.manifest = p.is_absolute() ? p : base_dir / p;
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) fail(Errc::kConfig, "unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          std::initializer_list<std::string_view> required) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::kMissingFile, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const KeyValues kv = parse_key_values(ss.str(), path.string());
  return parse_run_config(kv, path.parent_path(), required);
}

KeyValues frontend_to_kv(const FrontendConfig& cfg) {
  return {
      {"frontend.sample_rate_hz", std::to_string(cfg.sample_rate_hz)},
      {"frontend.n_fft", std::to_string(cfg.n_fft)},
      {"frontend.hop", std::to_string(cfg.hop)},
      {"frontend.n_mels", std::to_string(cfg.n_mels)},
      {"frontend.window_s", format_double(cfg.window_s)},
      {"frontend.log_epsilon", format_double(cfg.log_epsilon)},
      {"frontend.mel_fmin_hz", format_double(cfg.mel_fmin_hz)},
      {"frontend.mel_fmax_hz", format_double(cfg.mel_fmax_hz)},
  };
}

FrontendConfig frontend_from_kv(const KeyValues& kv) {
  RunConfig cfg;
  for (const auto& [key, value] : kv) {
    if (!key.starts_with("frontend.")) continue;
    const auto it = setters().find(key);
    if (it == setters().end()) fail(Errc::kConfig, "unknown frontend key '" + key + "'");
    it->second(cfg, key, value);
  }
  cfg.frontend.validate();
  return cfg.frontend;
}

}  // namespace birdssl::tools
