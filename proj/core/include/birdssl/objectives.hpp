// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace birdssl {

/// N x D, one embedding per row.
using EmbeddingBatch = Eigen::MatrixXd;
/// D x D cross-correlation between two standardized view batches.
using CrossCorrelation = Eigen::MatrixXd;

struct LabeledEmbeddingBatch {
  EmbeddingBatch embeddings;
  std::vector<int> labels;  // one per row
};

struct ObjectiveConfig {
  double temperature = 1.0;  // SimCLR / SupCon
  double lambda = 1e-2;      // Barlow Twins off-diagonal weight, FroSSL log-norm weight
  /// Adds 1e-12 to standardization variances instead of rejecting
  /// zero-variance dimensions.
  bool robust_norm = false;

  void validate() const;
};

enum class Objective { kSimClr, kBarlowTwins, kFroSsl, kSupCon };

std::string_view to_string(Objective objective);
/// Accepts "simclr", "bt", "frossl", "supcon".
Objective parse_objective(std::string_view name);

struct LossOutput {
  double value = 0.0;
  Eigen::MatrixXd grad_z1;
  std::optional<Eigen::MatrixXd> grad_z2;  // absent for SupCon's single batch
};

/// Rows scaled to unit Euclidean norm; throws kZeroNorm on an all-zero row.
EmbeddingBatch l2_normalize_rows(const EmbeddingBatch& z);

/// NT-Xent over concat([Z1, Z2]) with every other embedding as a negative,
/// averaged over the 2N anchors. Gradients are w.r.t. the un-normalized
/// inputs.
LossOutput simclr_loss(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                       const ObjectiveConfig& cfg = {});

/// sum_i (1 - C_ii)^2 + lambda * sum_{i != j} C_ij^2, C = Z1^t Z2 / N after
/// per-dimension standardization along the batch.
LossOutput barlow_twins_loss(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                             const ObjectiveConfig& cfg = {});

/// MSE(Z1, Z2) + lambda * (log ||Z1^t Z1||_F^2 + log ||Z2^t Z2||_F^2) after
/// batch centering (skipped for N = 1) and Frobenius normalization.
LossOutput frossl_loss(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                       const ObjectiveConfig& cfg = {});

/// Supervised contrastive loss over a single batch of views, anchor-averaged.
/// Positives of anchor i are all other rows with the same label.
LossOutput supcon_loss(const LabeledEmbeddingBatch& batch, const ObjectiveConfig& cfg = {});

/// Standardized cross-correlation used by barlow_twins_loss.
CrossCorrelation cross_correlation(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                                   bool robust_norm = false);

/// ||Z^t Z||_F^2 (D x D Gram) and ||Z Z^t||_F^2 (N x N Gram).
double feature_gram_frobenius_sq(const Eigen::MatrixXd& z);
double sample_gram_frobenius_sq(const Eigen::MatrixXd& z);

/// Uniform two-view entry point. For SupCon the batch is concat([Z1, Z2])
/// with `labels` (length N) duplicated across views, and the gradient is
/// split back into grad_z1 / grad_z2. `labels` is ignored otherwise.
LossOutput evaluate_objective(Objective objective, const EmbeddingBatch& z1,
                              const EmbeddingBatch& z2, std::span<const int> labels,
                              const ObjectiveConfig& cfg);

using TwoViewLoss =
    std::function<LossOutput(const EmbeddingBatch& z1, const EmbeddingBatch& z2)>;

/// Central-difference check of a two-view loss. Returns
/// max_i |analytic_i - numeric_i| / max(1e-12, |analytic_i| + |numeric_i|)
/// over every coordinate of Z1 and Z2.
double finite_difference_check(const TwoViewLoss& loss, const EmbeddingBatch& z1,
                               const EmbeddingBatch& z2, double h);

double finite_difference_check(Objective objective, const EmbeddingBatch& z1,
                               const EmbeddingBatch& z2, std::span<const int> labels,
                               const ObjectiveConfig& cfg, double h);

}  // namespace birdssl
