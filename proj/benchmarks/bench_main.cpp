// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "birdssl/audio.hpp"
#include "birdssl/augment.hpp"
#include "birdssl/encoder.hpp"
#include "birdssl/objectives.hpp"
#include "birdssl/random.hpp"

namespace {

using namespace birdssl;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void BM_Objective(benchmark::State& state, Objective objective) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd z1 = gaussian(n, 64, 1), z2 = gaussian(n, 64, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_objective(objective, z1, z2, labels, {}));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK_CAPTURE(BM_Objective, simclr, Objective::kSimClr)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(BM_Objective, bt, Objective::kBarlowTwins)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(BM_Objective, frossl, Objective::kFroSsl)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(BM_Objective, supcon, Objective::kSupCon)->Arg(64)->Arg(256);

AudioClip tone(double seconds) {
  AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.resize(static_cast<std::size_t>(seconds * clip.sample_rate_hz));
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = static_cast<float>(
        0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) / 16000.0));
  }
  return clip;
}

void BM_MelFrontend(benchmark::State& state) {
  const MelFrontend mel{FrontendConfig{}};
  const AudioClip clip = tone(5.0);
  for (auto _ : state) benchmark::DoNotOptimize(mel(clip));
}
BENCHMARK(BM_MelFrontend)->Unit(benchmark::kMillisecond);

void BM_EncoderForward(benchmark::State& state) {
  const Encoder<float> encoder{EncoderConfig{}};
  const Parameters<float> params = encoder.init_parameters(0);
  const MelSpectrogram spec = MelFrontend{FrontendConfig{}}(tone(5.0));
  for (auto _ : state) benchmark::DoNotOptimize(encoder.forward(spec, params));
}
BENCHMARK(BM_EncoderForward)->Unit(benchmark::kMillisecond);

void BM_EncoderForwardBackward(benchmark::State& state) {
  const Encoder<float> encoder{EncoderConfig{}};
  const Parameters<float> params = encoder.init_parameters(0);
  const MelSpectrogram spec = MelFrontend{FrontendConfig{}}(tone(5.0));
  const Vector<float> grad = Vector<float>::Ones(encoder.config().output_dim());
  for (auto _ : state) {
    Encoder<float>::Cache cache;
    encoder.forward(spec, params, &cache);
    std::vector<Tensor<float>> grads;
    for (const auto& t : params.tensors) grads.push_back(Tensor<float>::zeros(t.shape));
    encoder.backward(grad, cache, params, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Unit(benchmark::kMillisecond);

void BM_MakeViews(benchmark::State& state) {
  const MelSpectrogram spec = MelFrontend{FrontendConfig{}}(tone(5.0));
  const std::vector<MelSpectrogram> pool(8, spec);
  const AugmentConfig cfg;
  Rng rng = make_rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(make_views(spec, spec, pool, cfg, rng));
}
BENCHMARK(BM_MakeViews);

}  // namespace

BENCHMARK_MAIN();
