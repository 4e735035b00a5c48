// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "birdssl/checkpoint.hpp"
#include "birdssl/dump_io.hpp"
#include "birdssl/error.hpp"
#include "commands.hpp"
#include "run_config.hpp"
#include "test_util.hpp"

namespace birdssl::tools {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected birdssl::Error";
  return Error(Errc::kIo, "none");
}

SynthConfig small_synth(std::uint64_t seed = 3) {
  SynthConfig s;
  s.n_train_classes = 4;
  s.n_test_classes = 4;
  s.files_per_class = 3;
  s.min_duration_s = 4.0;
  s.max_duration_s = 5.0;
  s.chunk_s = 2.5;
  s.seed = seed;
  return s;
}

// Front-end and encoder small enough for sub-second training epochs.
constexpr const char* kToyConfig =
    "frontend.n_fft=512\n"
    "frontend.hop=256\n"
    "frontend.n_mels=32\n"
    "frontend.window_s=2.5\n"
    "encoder.stages=4:3:2,8:3:2\n"
    "encoder.embedding_dim=8\n"
    "encoder.projector_dims=8\n"
    "augment.sa_freq_width=4\n"
    "augment.sa_time_width=4\n"
    "train.batch_size=4\n"
    "train.epochs=1\n"
    "train.seed=9\n"
    "eval.n_way=3\n"
    "eval.n_query=1\n"
    "eval.n_tasks=20\n";

struct ToyProject {
  TempDir dir{"cli"};
  fs::path config = dir / "run.cfg";

  explicit ToyProject(const std::string& extra = "train.objective=bt\n") {
    std::ostringstream sink;
    cmd_synth_data(dir / "data", small_synth(), sink);
    write_file(config, std::string("data.manifest=data/manifest.csv\n") + kToyConfig + extra);
  }
};

TEST(RunConfig, UnknownKeyIsRejectedByName) {
  const Error e = error_of([] { parse_run_config({{"train.learning_rat", "0.1"}}, {}); });
  EXPECT_EQ(e.code(), Errc::kConfig);
  EXPECT_NE(std::string(e.what()).find("train.learning_rat"), std::string::npos);
}

TEST(RunConfig, MissingRequiredKeyIsNamed) {
  const Error e = error_of(
      [] { parse_run_config({{"data.manifest", "m.csv"}}, {}, {"data.manifest", "train.objective"}); });
  EXPECT_EQ(e.code(), Errc::kConfig);
  EXPECT_NE(std::string(e.what()).find("train.objective"), std::string::npos);
}

TEST(RunConfig, ManifestResolvesAgainstConfigDirectory) {
  const RunConfig c = parse_run_config({{"data.manifest", "data/m.csv"}}, "/cfgdir");
  ASSERT_TRUE(c.manifest);
  EXPECT_EQ(*c.manifest, fs::path("/cfgdir/data/m.csv"));
}

TEST(RunConfig, ParsesEveryNamespace) {
  const RunConfig c = parse_run_config(parse_key_values(kToyConfig), {});
  EXPECT_EQ(c.frontend.n_mels, 32);
  EXPECT_EQ(c.encoder.stages.size(), 2u);
  EXPECT_EQ(c.encoder.stages[1].out_channels, 8);
  EXPECT_EQ(c.encoder.projector_dims, std::vector<int>{8});
  EXPECT_EQ(c.augment.sa_time_width, 4);
  EXPECT_EQ(c.train.batch_size, 4);
  EXPECT_EQ(c.eval.n_way, 3);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, InvalidValueFailsValidation) {
  EXPECT_THROW(parse_run_config({{"train.batch_size", "1"}}, {}).validate(), Error);
  EXPECT_THROW(parse_run_config({{"train.batch_size", "many"}}, {}), Error);
}

TEST(SynthData, DefaultDatasetShape) {
  TempDir dir("synth");
  std::ostringstream sink;
  const DatasetManifest m = cmd_synth_data(dir.path(), SynthConfig{}, sink);
  EXPECT_EQ(m.entries.size(), 360u);
  std::set<std::string> train, test;
  for (const auto& e : m.entries) (e.split == Split::kTrain ? train : test).insert(e.label);
  EXPECT_EQ(train.size(), 12u);
  EXPECT_EQ(test.size(), 6u);
  for (const auto& label : test) EXPECT_EQ(train.count(label), 0u) << label;
  for (const auto& e : m.entries) {
    const AudioClip clip = load_wav(m.resolve(e));
    const double seconds = static_cast<double>(clip.samples.size()) / clip.sample_rate_hz;
    EXPECT_GE(seconds, 8.0);
    EXPECT_LE(seconds, 15.0);
  }
  EXPECT_EQ(read_manifest(dir / "manifest.csv").entries, m.entries);
}

TEST(SynthData, SameSeedIsByteIdentical) {
  TempDir a("synth_a"), b("synth_b");
  std::ostringstream sink;
  const DatasetManifest ma = cmd_synth_data(a.path(), small_synth(), sink);
  cmd_synth_data(b.path(), small_synth(), sink);
  EXPECT_EQ(slurp(a / "manifest.csv"), slurp(b / "manifest.csv"));
  for (const auto& e : ma.entries) {
    EXPECT_EQ(slurp(a / e.path), slurp(b / e.path)) << e.path;
  }
}

TEST(SynthData, ScoreFilesMarkExactlyOneChunk) {
  TempDir dir("synth_scores");
  std::ostringstream sink;
  const DatasetManifest m = cmd_synth_data(dir.path(), small_synth(), sink);
  for (const auto& e : m.entries) {
    std::istringstream in(slurp(m.resolve(e).string() + ".scores"));
    double v = 0.0, sum = 0.0;
    while (in >> v) sum += v;
    EXPECT_EQ(sum, 1.0) << e.path;
  }
}

TEST(Train, WritesCheckpointWithMagicAndLog) {
  ToyProject p;
  std::ostringstream sink;
  cmd_train({p.config, std::nullopt, p.dir / "out", false}, sink);
  EXPECT_EQ(slurp(p.dir / "out/encoder.sslb").substr(0, 4), "SSLB");
  const Checkpoint ck = read_checkpoint(p.dir / "out/encoder.sslb");
  EXPECT_EQ(ck.encoder.embedding_dim, 8);
  EXPECT_EQ(ck.metadata.at("train.objective"), "bt");
  const std::string log = slurp(p.dir / "out/train.log");
  EXPECT_EQ(log.rfind("epoch\tloss\tseconds\n", 0), 0u);
  EXPECT_NE(log.find("\n0\t"), std::string::npos);
}

TEST(Train, MissingObjectiveIsNamedBeforeAnyOutput) {
  TempDir dir("cli_missing");
  write_file(dir / "run.cfg", "data.manifest=m.csv\n");
  std::ostringstream sink;
  const Error e = error_of([&] { cmd_train({dir / "run.cfg", std::nullopt, dir / "out", false}, sink); });
  EXPECT_EQ(e.code(), Errc::kConfig);
  EXPECT_NE(std::string(e.what()).find("train.objective"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Train, SupConOnUnlabeledEntriesFailsBeforeTraining) {
  ToyProject p("train.objective=supcon\n");
  DatasetManifest m = read_manifest(p.dir / "data/manifest.csv");
  for (auto& e : m.entries) {
    if (e.split == Split::kTrain) e.label.clear();
  }
  write_manifest(p.dir / "data/manifest.csv", m);
  std::ostringstream sink;
  const Error e =
      error_of([&] { cmd_train({p.config, std::nullopt, p.dir / "out", false}, sink); });
  EXPECT_EQ(exit_code_for(e.code()), kExitValidation);
  EXPECT_FALSE(fs::exists(p.dir / "out/encoder.sslb"));
}

TEST(Eval, TooFewClassesReportsRequiredAndAvailable) {
  ToyProject p;
  std::ostringstream sink;
  cmd_train({p.config, std::nullopt, p.dir / "ck", true}, sink);
  EvalOptions o;
  o.checkpoint = p.dir / "ck/encoder.sslb";
  o.config = p.config;
  o.out_dir = p.dir / "ev";
  o.n_way = 5;
  const Error e = error_of([&] { cmd_eval(o, sink); });
  EXPECT_EQ(e.code(), Errc::kInsufficientData);
  const std::string what = e.what();
  EXPECT_NE(what.find('5'), std::string::npos) << what;
  EXPECT_NE(what.find('4'), std::string::npos) << what;
  EXPECT_FALSE(fs::exists(p.dir / "ev/results.txt"));
}

TEST(Eval, FixedSeedGivesIdenticalResultsFile) {
  ToyProject p;
  std::ostringstream sink;
  cmd_train({p.config, std::nullopt, p.dir / "ck", false}, sink);
  EvalOptions o;
  o.checkpoint = p.dir / "ck/encoder.sslb";
  o.config = p.config;
  o.seed = 21;
  o.dump_embeddings = true;
  o.out_dir = p.dir / "ev1";
  const EvalResult r = cmd_eval(o, sink);
  o.out_dir = p.dir / "ev2";
  cmd_eval(o, sink);
  EXPECT_EQ(slurp(p.dir / "ev1/results.txt"), slurp(p.dir / "ev2/results.txt"));
  EXPECT_EQ(slurp(p.dir / "ev1/embeddings.embd"), slurp(p.dir / "ev2/embeddings.embd"));
  const KeyValues kv = parse_key_values(slurp(p.dir / "ev1/results.txt"));
  EXPECT_EQ(kv.at("n_way"), "3");
  EXPECT_EQ(kv.at("seed"), "21");
  EXPECT_EQ(parse_double("accuracy", kv.at("accuracy")), r.accuracy);
  EXPECT_GE(r.accuracy, 0.0);
  EXPECT_LE(r.accuracy, 1.0);
}

TEST(GradCheck, DefaultRunPassesAndFaultFails) {
  std::ostringstream out;
  EXPECT_EQ(cmd_grad_check({}, out), kExitOk);
  for (const char* name : {"simclr", "bt", "frossl", "supcon"}) {
    EXPECT_NE(out.str().find(name), std::string::npos);
  }
  GradCheckOptions bad;
  bad.inject_fault = true;
  std::ostringstream out2;
  EXPECT_NE(cmd_grad_check(bad, out2), kExitOk);
  EXPECT_NE(out2.str().find("FAIL"), std::string::npos);
}

TEST(GradCheck, SingleObjectiveReportsErrorBelowTolerance) {
  GradCheckOptions o;
  o.objective = "bt";
  std::ostringstream out;
  EXPECT_EQ(cmd_grad_check(o, out), kExitOk);
  std::istringstream in(out.str());
  std::string name, label;
  double err = 1.0;
  in >> name >> label >> err;
  EXPECT_EQ(name, "bt");
  EXPECT_LT(err, 1e-4);
}

TEST(AugmentPreview, StagesSatisfyTheirContracts) {
  TempDir dir("preview");
  std::ostringstream sink;
  const DatasetManifest m = cmd_synth_data(dir / "data", small_synth(), sink);
  AugmentPreviewOptions o;
  o.audio = m.resolve(m.entries.front());
  o.seed = 4;
  o.out_dir = dir / "pv";
  cmd_augment_preview(o, sink);

  const MelSpectrogram input = read_mels(dir / "pv/input.mels");
  const MelSpectrogram shifted = read_mels(dir / "pv/shift.mels");
  const MelSpectrogram mixed = read_mels(dir / "pv/mix.mels");
  const MelSpectrogram masked = read_mels(dir / "pv/mask.mels");
  ASSERT_TRUE(input.same_shape(shifted));
  const int f_n = input.n_mels(), t_n = input.n_frames();

  bool rotation_found = false;
  for (int s = 0; s < t_n && !rotation_found; ++s) {
    bool ok = true;
    for (int f = 0; f < f_n && ok; ++f) {
      for (int t = 0; t < t_n && ok; ++t) ok = shifted.at(f, (t + s) % t_n) == input.at(f, t);
    }
    rotation_found = ok;
  }
  EXPECT_TRUE(rotation_found);
  EXPECT_EQ(mixed.values(), shifted.values());

  const AugmentConfig a;
  const std::size_t bound = static_cast<std::size_t>(a.sa_blocks) *
                            (static_cast<std::size_t>(a.sa_freq_width) * t_n +
                             static_cast<std::size_t>(a.sa_time_width) * f_n);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < masked.size(); ++i) changed += masked.values()[i] != mixed.values()[i];
  EXPECT_LE(changed, bound);
  EXPECT_GT(changed, 0u);
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(BIRDSSL_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(run_cli("grad-check --objective simclr"), 0);
  EXPECT_EQ(run_cli("grad-check --objective simclr --inject-fault"), 1);
  EXPECT_EQ(run_cli("grad-check --objective nope"), 1);
  EXPECT_EQ(run_cli("no-such-command"), 1);
  TempDir dir("cli_bin");
  write_file(dir / "bad.cfg", "train.objective=bt\nbogus.key=1\n");
  EXPECT_EQ(run_cli("train --config " + (dir / "bad.cfg").string() + " --out " +
                    (dir / "o").string()),
            1);
}

}  // namespace
}  // namespace birdssl::tools
