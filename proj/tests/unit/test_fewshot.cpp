// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <set>

#include <Eigen/QR>

#include "birdssl/error.hpp"
#include "birdssl/fewshot.hpp"
#include "test_util.hpp"

namespace birdssl {
namespace {

using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<int> classes_with_files(int n_classes, int files) {
  std::vector<int> out;
  for (int c = 0; c < n_classes; ++c) {
    for (int f = 0; f < files; ++f) out.push_back(c);
  }
  return out;
}

TEST(ClipEmbedding, Strategies) {
  const std::vector<VectorXd> one = {vec({1, 2})};
  EXPECT_EQ(clip_embedding(one, EmbeddingStrategy::kChunkAverage),
            clip_embedding(one, EmbeddingStrategy::kActivationSelect,
                           std::vector<ActivationScore>{{0, 0.3}}));
  const std::vector<VectorXd> two = {vec({1, 3}), vec({3, -1})};
  EXPECT_EQ(clip_embedding(two, EmbeddingStrategy::kChunkAverage), vec({2, 1}));
  const std::vector<ActivationScore> scores = {{0, 0.2}, {1, 0.9}};
  EXPECT_EQ(clip_embedding(two, EmbeddingStrategy::kActivationSelect, scores), two[1]);
  EXPECT_THROW(clip_embedding(two, EmbeddingStrategy::kActivationSelect), Error);
  EXPECT_THROW(clip_embedding(std::vector<VectorXd>{}, EmbeddingStrategy::kChunkAverage), Error);
}

TEST(ClipEmbedding, SingleChunkClipAgreesAcrossStrategies) {
  EncoderConfig cfg;
  cfg.stages = {{4, 3, 2}};
  cfg.embedding_dim = 6;
  const Encoder<float> enc(cfg);
  const auto params = enc.init_parameters(1);
  const MelFrontend frontend{FrontendConfig{}};
  Rng rng = make_rng(2);
  const AudioClip clip = testing::noise_clip(70000, rng);
  const VectorXd a = clip_embedding(clip, enc, params, frontend, EmbeddingStrategy::kChunkAverage);
  const VectorXd b =
      clip_embedding(clip, enc, params, frontend, EmbeddingStrategy::kActivationSelect);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 6);
}

TEST(SampleEpisode, UsesAllClassesWhenNWayEqualsClassCount) {
  EvalConfig cfg;
  const auto files = classes_with_files(5, 6);
  Rng rng = make_rng(3);
  const Episode e = sample_episode(files, cfg, rng);
  std::set<int> seen;
  for (const auto& s : e.support) seen.insert(s.class_id);
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_EQ(e.support.size(), 5u);
  EXPECT_EQ(e.query.size(), 25u);
}

TEST(SampleEpisode, SupportAndQueryAreDisjointAndConsistent) {
  EvalConfig cfg;
  cfg.k_shot = 2;
  cfg.n_query = 3;
  const auto files = classes_with_files(9, 7);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng = make_rng(seed);
    const Episode e = sample_episode(files, cfg, rng);
    std::set<std::size_t> used;
    std::map<int, int> support_per_class;
    for (const auto& s : e.support) {
      ASSERT_TRUE(used.insert(s.file_index).second);
      ASSERT_EQ(files[s.file_index], s.class_id);
      ++support_per_class[s.class_id];
    }
    for (const auto& q : e.query) {
      ASSERT_TRUE(used.insert(q.file_index).second);
      ASSERT_EQ(files[q.file_index], q.class_id);
      ASSERT_TRUE(support_per_class.count(q.class_id));
    }
    ASSERT_EQ(support_per_class.size(), 5u);
    for (const auto& [c, n] : support_per_class) ASSERT_EQ(n, 2);
  }
}

TEST(SampleEpisode, ClassFrequenciesAreUniform) {
  EvalConfig cfg;
  const auto files = classes_with_files(20, 6);
  std::vector<int> counts(20, 0);
  for (int t = 0; t < 10000; ++t) {
    Rng rng = make_rng(17, {static_cast<std::uint64_t>(t)});
    for (const auto& s : sample_episode(files, cfg, rng).support) ++counts[static_cast<std::size_t>(s.class_id)];
  }
  // Each class appears with probability 1/4 per task.
  const double sigma = std::sqrt(10000 * 0.25 * 0.75);
  for (int c : counts) EXPECT_LE(std::abs(c - 2500.0), 3.0 * sigma);
}

TEST(SampleEpisode, InsufficientDataMessage) {
  EvalConfig cfg;
  const auto files = classes_with_files(4, 10);
  Rng rng = make_rng(4);
  try {
    sample_episode(files, cfg, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInsufficientData);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("need 5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4 available"), std::string::npos) << msg;
  }
  const auto few_files = classes_with_files(6, 3);
  EXPECT_THROW(sample_episode(few_files, cfg, rng), Error);
}

TEST(Prototypes, MeanPerClassSortedById) {
  const std::vector<LabeledEmbedding> pool = {{vec({0, 2}), 7}, {vec({2, 0}), 7}, {vec({5, 5}), 1}};
  const std::vector<EpisodeItem> support = {{0, 7}, {2, 1}, {1, 7}};
  const auto protos = compute_prototypes(support, pool);
  ASSERT_EQ(protos.size(), 2u);
  EXPECT_EQ(protos[0].class_id, 1);
  EXPECT_EQ(protos[0].vector, vec({5, 5}));
  EXPECT_EQ(protos[1].vector, vec({1, 1}));
  const std::vector<EpisodeItem> reordered = {{1, 7}, {0, 7}, {2, 1}};
  const auto again = compute_prototypes(reordered, pool);
  EXPECT_EQ(again[1].vector, protos[1].vector);
}

TEST(CenterAndNormalize, Examples) {
  const auto single = center_and_normalize({{0, vec({3, 4})}}, {vec({3, 4}), vec({3, 5})});
  EXPECT_EQ(single.degenerate, 2);
  EXPECT_EQ(single.prototypes[0].vector, vec({0, 0}));
  EXPECT_EQ(single.queries[0], vec({0, 0}));
  EXPECT_EQ(single.queries[1], vec({0, 1}));

  const auto sym = center_and_normalize({{0, vec({2, 0})}, {1, vec({-2, 0})}}, {vec({0, 3})});
  EXPECT_EQ(sym.degenerate, 0);
  EXPECT_EQ(sym.prototypes[0].vector, vec({1, 0}));
  EXPECT_EQ(sym.prototypes[1].vector, vec({-1, 0}));
  EXPECT_EQ(sym.queries[0], vec({0, 1}));

  Rng rng = make_rng(5);
  std::vector<Prototype> protos;
  for (int c = 0; c < 5; ++c) protos.push_back({c, testing::random_matrix(8, 1, rng)});
  std::vector<VectorXd> queries;
  for (int q = 0; q < 10; ++q) queries.push_back(testing::random_matrix(8, 1, rng));
  const auto out = center_and_normalize(protos, queries);
  for (const auto& p : out.prototypes) EXPECT_NEAR(p.vector.norm(), 1.0, 1e-12);
  for (const auto& q : out.queries) EXPECT_NEAR(q.norm(), 1.0, 1e-12);
}

TEST(Classify, Examples) {
  const std::vector<Prototype> protos = {{4, vec({1, 0})}, {9, vec({0, 1})}};
  EXPECT_EQ(classify(vec({0, 1}), protos), 9);
  EXPECT_EQ(classify(vec({0.9, 0.1}), protos), 4);
  EXPECT_EQ(classify(vec({1, 1}), protos), 4);  // tie
  const std::vector<Prototype> reversed = {{9, vec({0, 1})}, {4, vec({1, 0})}};
  EXPECT_EQ(classify(vec({1, 1}), reversed), 4);
}

TEST(Classify, EuclideanAgreesWithCosineOnUnitVectors) {
  Rng rng = make_rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Prototype> protos;
    for (int c = 0; c < 5; ++c) protos.push_back({c, testing::random_matrix(16, 1, rng).normalized()});
    const VectorXd q = testing::random_matrix(16, 1, rng).normalized();
    int best = 0;
    for (int c = 1; c < 5; ++c) {
      if (q.dot(protos[static_cast<std::size_t>(c)].vector) > q.dot(protos[static_cast<std::size_t>(best)].vector)) best = c;
    }
    ASSERT_EQ(classify(q, protos), best);
  }
}

TEST(Classify, InvariantUnderJointTranslationAndRotation) {
  Rng rng = make_rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Prototype> protos, moved, rotated;
    const VectorXd shift = testing::random_matrix(6, 1, rng);
    const Eigen::MatrixXd rot =
        Eigen::HouseholderQR<Eigen::MatrixXd>(testing::random_matrix(6, 6, rng)).householderQ();
    for (int c = 0; c < 4; ++c) {
      const VectorXd v = testing::random_matrix(6, 1, rng);
      protos.push_back({c, v});
      moved.push_back({c, v + shift});
      rotated.push_back({c, rot * v});
    }
    const VectorXd q = testing::random_matrix(6, 1, rng);
    const int label = classify(q, protos);
    ASSERT_EQ(classify(q + shift, moved), label);
    ASSERT_EQ(classify(rot * q, rotated), label);
  }
}

TEST(Ci95, HandFormula) {
  const std::vector<double> xs = {1, 0, 1, 0};
  EXPECT_NEAR(ci95_half_width(xs), 0.5659, 1e-4);
  EXPECT_NEAR(ci95_half_width(xs), oracle::ci95(xs), 1e-15);
  EXPECT_EQ(ci95_half_width(std::vector<double>{0.5}), 0.0);
}

TEST(RunEval, OrthogonalClassConstantsAreSeparable) {
  std::vector<LabeledEmbedding> pool;
  for (int c = 0; c < 8; ++c) {
    for (int f = 0; f < 6; ++f) pool.push_back({VectorXd::Unit(8, c) * 3.0, c});
  }
  EvalConfig cfg;
  cfg.n_tasks = 200;
  const EvalResult r = run_eval(pool, cfg);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.ci95, 0.0);
}

TEST(RunEval, LabelIndependentEmbeddingsAreAtChance) {
  Rng rng = make_rng(8);
  std::vector<LabeledEmbedding> pool;
  for (int c = 0; c < 10; ++c) {
    for (int f = 0; f < 12; ++f) pool.push_back({testing::random_matrix(16, 1, rng), c});
  }
  EvalConfig cfg;
  cfg.n_tasks = 2000;
  const EvalResult r = run_eval(pool, cfg);
  const double sigma = r.ci95 / 1.96;
  EXPECT_LE(std::abs(r.accuracy - 0.2), 3.0 * sigma) << r.accuracy << " +/- " << sigma;
}

TEST(RunEval, FixedSeedIsReproducible) {
  Rng rng = make_rng(9);
  std::vector<LabeledEmbedding> pool;
  for (int c = 0; c < 6; ++c) {
    for (int f = 0; f < 7; ++f) pool.push_back({testing::random_matrix(4, 1, rng) + VectorXd::Constant(4, c), c});
  }
  EvalConfig cfg;
  cfg.n_tasks = 300;
  cfg.seed = 5;
  const EvalResult a = run_eval(pool, cfg);
  const EvalResult b = run_eval(pool, cfg);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.ci95, b.ci95);
  EXPECT_EQ(a.task_accuracies, b.task_accuracies);
}

TEST(RunEval, QueryEqualToSupportIsRecovered) {
  // Two classes, one shot: a query identical to a support embedding lands in
  // that support's class.
  Rng rng = make_rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd a = testing::random_matrix(5, 1, rng), b = testing::random_matrix(5, 1, rng);
    const auto centered = center_and_normalize({{0, a}, {1, b}}, {a, b});
    ASSERT_EQ(centered.degenerate, 0);
    ASSERT_EQ(classify(centered.queries[0], centered.prototypes), 0);
    ASSERT_EQ(classify(centered.queries[1], centered.prototypes), 1);
  }
}

TEST(EvalConfig, Invariants) {
  EvalConfig c;
  c.n_way = 1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.k_shot = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.n_tasks = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_strategy("activation_select"), EmbeddingStrategy::kActivationSelect);
  EXPECT_THROW(parse_strategy("max"), Error);
}

}  // namespace
}  // namespace birdssl
