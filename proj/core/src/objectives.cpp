// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "birdssl/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "birdssl/error.hpp"

namespace birdssl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ObjectiveConfig::validate() const {
  require(temperature > 0.0 && std::isfinite(temperature), Errc::kInvalidArgument,
          "objective: temperature must be > 0");
  require(lambda >= 0.0 && std::isfinite(lambda), Errc::kInvalidArgument,
          "objective: lambda must be >= 0");
}

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::kSimClr: return "simclr";
    case Objective::kBarlowTwins: return "bt";
    case Objective::kFroSsl: return "frossl";
    case Objective::kSupCon: return "supcon";
  }
  return "unknown";
}

Objective parse_objective(std::string_view name) {
  if (name == "simclr") return Objective::kSimClr;
  if (name == "bt" || name == "barlow_twins") return Objective::kBarlowTwins;
  if (name == "frossl") return Objective::kFroSsl;
  if (name == "supcon") return Objective::kSupCon;
  fail(Errc::kInvalidArgument,
       "unknown objective '" + std::string(name) + "' (expected simclr|bt|frossl|supcon)");
}

namespace {

constexpr double kRobustEps = 1e-12;

void check_finite(const MatrixXd& z, const char* what) {
  require(z.allFinite(), Errc::kNonFinite, std::string(what) + " contains non-finite values");
}

void check_pair(const MatrixXd& z1, const MatrixXd& z2) {
  require(z1.rows() == z2.rows() && z1.cols() == z2.cols(), Errc::kShapeMismatch,
          "view batches must have identical shapes");
  require(z1.rows() >= 1 && z1.cols() >= 1, Errc::kEmptyInput, "empty embedding batch");
  check_finite(z1, "Z1");
  check_finite(z2, "Z2");
}

VectorXd row_norms(const MatrixXd& z) {
  VectorXd norms(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < z.cols(); ++d) acc += z(i, d) * z(i, d);
    norms(i) = std::sqrt(acc);
    require(norms(i) > 0.0, Errc::kZeroNorm,
            "embedding row " + std::to_string(i) + " has zero norm");
  }
  return norms;
}

// d/dz of u = z / |z| applied to upstream g: (g - u (u . g)) / |z|
MatrixXd row_normalize_backward(const MatrixXd& u, const VectorXd& norms, const MatrixXd& g) {
  MatrixXd out(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double proj = u.row(i).dot(g.row(i));
    out.row(i) = (g.row(i) - proj * u.row(i)) / norms(i);
  }
  return out;
}

// Shared softmax-contrastive core over M rows, mean over anchors.
// `positives[a]` lists the positive indices of anchor a. `block` is the
// size of one view block; the denominator of anchor a is accumulated
// starting at a's own block so that swapping the two view blocks yields
// bitwise-identical per-anchor terms.
LossOutput contrastive(const MatrixXd& z, const std::vector<std::vector<Eigen::Index>>& positives,
                       Eigen::Index block, double temperature) {
  const Eigen::Index m = z.rows();
  const VectorXd norms = row_norms(z);
  MatrixXd u(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < m; ++i) u.row(i) = z.row(i) / norms(i);

  MatrixXd sim(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index k = 0; k < m; ++k) {
      double acc = 0.0;
      for (Eigen::Index d = 0; d < z.cols(); ++d) acc += u(a, d) * u(k, d);
      sim(a, k) = acc / temperature;
    }
  }

  std::vector<double> anchor_loss(static_cast<std::size_t>(m));
  MatrixXd grad_sim = MatrixXd::Zero(m, m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::Index origin = block > 0 ? (a / block) * block : 0;
    double max_s = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != a) max_s = std::max(max_s, sim(a, k));
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index k = (origin + j) % m;
      if (k != a) denom += std::exp(sim(a, k) - max_s);
    }
    const double lse = max_s + std::log(denom);

    const auto& pos = positives[static_cast<std::size_t>(a)];
    const double inv_p = 1.0 / static_cast<double>(pos.size());
    double pos_sum = 0.0;
    for (Eigen::Index p : pos) pos_sum += sim(a, p);
    anchor_loss[static_cast<std::size_t>(a)] = lse - pos_sum * inv_p;

    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != a) grad_sim(a, k) = std::exp(sim(a, k) - lse) * inv_m;
    }
    for (Eigen::Index p : pos) grad_sim(a, p) -= inv_p * inv_m;
  }

  // Sum anchors pairwise (a, a + block) so that view swaps commute exactly.
  double total = 0.0;
  if (block > 0 && m == 2 * block) {
    for (Eigen::Index i = 0; i < block; ++i) {
      total += anchor_loss[static_cast<std::size_t>(i)] +
               anchor_loss[static_cast<std::size_t>(i + block)];
    }
  } else {
    for (double l : anchor_loss) total += l;
  }

  const MatrixXd grad_u = (grad_sim + grad_sim.transpose()) * u / temperature;
  LossOutput out;
  out.value = total * inv_m;
  out.grad_z1 = row_normalize_backward(u, norms, grad_u);
  return out;
}

struct Standardized {
  MatrixXd value;  // (Z - mu) / sigma
  VectorXd sigma;
};

Standardized standardize_columns(const MatrixXd& z, bool robust, const char* which) {
  const Eigen::Index n = z.rows();
  Standardized s{MatrixXd(z.rows(), z.cols()), VectorXd(z.cols())};
  for (Eigen::Index d = 0; d < z.cols(); ++d) {
    if (!robust) {
      bool constant = true;
      for (Eigen::Index i = 1; i < n && constant; ++i) constant = z(i, d) == z(0, d);
      require(!constant, Errc::kZeroVariance,
              std::string(which) + " dimension " + std::to_string(d) + " has zero variance");
    }
    const double mean = z.col(d).sum() / static_cast<double>(n);
    double var = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) var += (z(i, d) - mean) * (z(i, d) - mean);
    var /= static_cast<double>(n);
    if (robust) var += kRobustEps;
    s.sigma(d) = std::sqrt(var);
    for (Eigen::Index i = 0; i < n; ++i) s.value(i, d) = (z(i, d) - mean) / s.sigma(d);
  }
  return s;
}

// Backward of per-column standardization with biased variance.
MatrixXd standardize_backward(const Standardized& s, const MatrixXd& g) {
  const auto n = static_cast<double>(g.rows());
  MatrixXd out(g.rows(), g.cols());
  for (Eigen::Index d = 0; d < g.cols(); ++d) {
    const double mean_g = g.col(d).sum() / n;
    const double mean_gx = g.col(d).dot(s.value.col(d)) / n;
    out.col(d) = (g.col(d).array() - mean_g - s.value.col(d).array() * mean_gx) / s.sigma(d);
  }
  return out;
}

MatrixXd center_columns(const MatrixXd& z) {
  if (z.rows() == 1) return z;
  return z.rowwise() - z.colwise().mean();
}

MatrixXd center_backward(const MatrixXd& g) {
  if (g.rows() == 1) return g;
  return g.rowwise() - g.colwise().mean();
}

}  // namespace

EmbeddingBatch l2_normalize_rows(const EmbeddingBatch& z) {
  const VectorXd norms = row_norms(z);
  EmbeddingBatch out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) out.row(i) = z.row(i) / norms(i);
  return out;
}

LossOutput simclr_loss(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                       const ObjectiveConfig& cfg) {
  cfg.validate();
  check_pair(z1, z2);
  const Eigen::Index n = z1.rows();
  MatrixXd z(2 * n, z1.cols());
  z << z1, z2;
  std::vector<std::vector<Eigen::Index>> positives(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    positives[static_cast<std::size_t>(i)] = {i + n};
    positives[static_cast<std::size_t>(i + n)] = {i};
  }
  LossOutput joint = contrastive(z, positives, n, cfg.temperature);
  LossOutput out;
  out.value = joint.value;
  out.grad_z1 = joint.grad_z1.topRows(n);
  out.grad_z2 = joint.grad_z1.bottomRows(n);
  return out;
}

LossOutput supcon_loss(const LabeledEmbeddingBatch& batch, const ObjectiveConfig& cfg) {
  cfg.validate();
  const MatrixXd& z = batch.embeddings;
  const Eigen::Index m = z.rows();
  require(static_cast<Eigen::Index>(batch.labels.size()) == m, Errc::kShapeMismatch,
          "supcon: label count differs from batch size");
  require(m >= 2, Errc::kInvalidArgument, "supcon: need at least two views");
  check_finite(z, "SupCon batch");
  std::vector<std::vector<Eigen::Index>> positives(static_cast<std::size_t>(m));
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != a && batch.labels[static_cast<std::size_t>(k)] ==
                        batch.labels[static_cast<std::size_t>(a)]) {
        positives[static_cast<std::size_t>(a)].push_back(k);
      }
    }
    require(!positives[static_cast<std::size_t>(a)].empty(), Errc::kEmptyPositiveSet,
            "supcon: anchor " + std::to_string(a) + " has no positive");
  }
  const Eigen::Index block = m % 2 == 0 ? m / 2 : 0;
  return contrastive(z, positives, block, cfg.temperature);
}

CrossCorrelation cross_correlation(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                                   bool robust_norm) {
  check_pair(z1, z2);
  require(z1.rows() >= 2, Errc::kInvalidArgument, "cross-correlation needs N >= 2");
  const auto s1 = standardize_columns(z1, robust_norm, "Z1");
  const auto s2 = standardize_columns(z2, robust_norm, "Z2");
  return s1.value.transpose() * s2.value / static_cast<double>(z1.rows());
}

LossOutput barlow_twins_loss(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                             const ObjectiveConfig& cfg) {
  cfg.validate();
  check_pair(z1, z2);
  require(z1.rows() >= 2, Errc::kInvalidArgument, "barlow twins needs N >= 2");
  const auto n = static_cast<double>(z1.rows());
  const Eigen::Index dim = z1.cols();
  const auto s1 = standardize_columns(z1, cfg.robust_norm, "Z1");
  const auto s2 = standardize_columns(z2, cfg.robust_norm, "Z2");
  const MatrixXd c = s1.value.transpose() * s2.value / n;

  double on_diag = 0.0, off_diag = 0.0;
  MatrixXd grad_c(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (i == j) {
        const double r = 1.0 - c(i, i);
        on_diag += r * r;
        grad_c(i, i) = -2.0 * r;
      } else {
        off_diag += c(i, j) * c(i, j);
        grad_c(i, j) = 2.0 * cfg.lambda * c(i, j);
      }
    }
  }

  LossOutput out;
  out.value = on_diag + cfg.lambda * off_diag;
  const MatrixXd g1 = s2.value * grad_c.transpose() / n;
  const MatrixXd g2 = s1.value * grad_c / n;
  out.grad_z1 = standardize_backward(s1, g1);
  out.grad_z2 = standardize_backward(s2, g2);
  return out;
}

double feature_gram_frobenius_sq(const Eigen::MatrixXd& z) {
  return (z.transpose() * z).squaredNorm();
}

double sample_gram_frobenius_sq(const Eigen::MatrixXd& z) {
  return (z * z.transpose()).squaredNorm();
}

LossOutput frossl_loss(const EmbeddingBatch& z1, const EmbeddingBatch& z2,
                       const ObjectiveConfig& cfg) {
  cfg.validate();
  check_pair(z1, z2);
  const auto n = static_cast<double>(z1.rows());

  const MatrixXd c1 = center_columns(z1);
  const MatrixXd c2 = center_columns(z2);
  const double norm1 = c1.norm();
  const double norm2 = c2.norm();
  require(norm1 > 0.0 && norm2 > 0.0, Errc::kZeroNorm,
          "frossl: view batch has zero Frobenius norm after centering");
  const MatrixXd y1 = c1 / norm1;
  const MatrixXd y2 = c2 / norm2;

  const MatrixXd diff = y1 - y2;
  const double mse = diff.squaredNorm() / n;
  const MatrixXd gram1 = y1.transpose() * y1;
  const MatrixXd gram2 = y2.transpose() * y2;
  const double f1 = gram1.squaredNorm();
  const double f2 = gram2.squaredNorm();
  const double reg = std::log(f1) + std::log(f2);

  // d/dY log ||Y^t Y||_F^2 = 4 Y (Y^t Y) / ||Y^t Y||_F^2
  const MatrixXd gy1 = 2.0 / n * diff + cfg.lambda * 4.0 / f1 * (y1 * gram1);
  const MatrixXd gy2 = -2.0 / n * diff + cfg.lambda * 4.0 / f2 * (y2 * gram2);

  auto frobenius_backward = [](const MatrixXd& y, double norm, const MatrixXd& g) {
    return MatrixXd((g - y * (g.cwiseProduct(y).sum())) / norm);
  };

  LossOutput out;
  out.value = mse + cfg.lambda * reg;
  out.grad_z1 = center_backward(frobenius_backward(y1, norm1, gy1));
  out.grad_z2 = center_backward(frobenius_backward(y2, norm2, gy2));
  return out;
}

LossOutput evaluate_objective(Objective objective, const EmbeddingBatch& z1,
                              const EmbeddingBatch& z2, std::span<const int> labels,
                              const ObjectiveConfig& cfg) {
  switch (objective) {
    case Objective::kSimClr: return simclr_loss(z1, z2, cfg);
    case Objective::kBarlowTwins: return barlow_twins_loss(z1, z2, cfg);
    case Objective::kFroSsl: return frossl_loss(z1, z2, cfg);
    case Objective::kSupCon: {
      check_pair(z1, z2);
      const Eigen::Index n = z1.rows();
      require(static_cast<Eigen::Index>(labels.size()) == n, Errc::kShapeMismatch,
              "supcon: need one label per example");
      LabeledEmbeddingBatch batch;
      batch.embeddings.resize(2 * n, z1.cols());
      batch.embeddings << z1, z2;
      batch.labels.assign(labels.begin(), labels.end());
      batch.labels.insert(batch.labels.end(), labels.begin(), labels.end());
      LossOutput joint = supcon_loss(batch, cfg);
      LossOutput out;
      out.value = joint.value;
      out.grad_z1 = joint.grad_z1.topRows(n);
      out.grad_z2 = joint.grad_z1.bottomRows(n);
      return out;
    }
  }
  fail(Errc::kInvalidArgument, "unknown objective");
}

double finite_difference_check(const TwoViewLoss& loss, const EmbeddingBatch& z1,
                               const EmbeddingBatch& z2, double h) {
  require(h > 0.0, Errc::kInvalidArgument, "finite difference step must be positive");
  const LossOutput analytic = loss(z1, z2);
  require(analytic.grad_z2.has_value(), Errc::kInvalidArgument,
          "finite_difference_check needs gradients for both views");

  double worst = 0.0;
  MatrixXd p1 = z1, p2 = z2;
  auto probe = [&](MatrixXd& target, Eigen::Index i, Eigen::Index j, double g) {
    const double saved = target(i, j);
    target(i, j) = saved + h;
    const double up = loss(p1, p2).value;
    target(i, j) = saved - h;
    const double down = loss(p1, p2).value;
    target(i, j) = saved;
    require(std::isfinite(up) && std::isfinite(down), Errc::kNonFinite,
            "loss is non-finite at a perturbed point");
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(g - numeric) / std::max(1e-12, std::abs(g) + std::abs(numeric));
    worst = std::max(worst, rel);
  };
  for (Eigen::Index i = 0; i < z1.rows(); ++i) {
    for (Eigen::Index j = 0; j < z1.cols(); ++j) probe(p1, i, j, analytic.grad_z1(i, j));
  }
  for (Eigen::Index i = 0; i < z2.rows(); ++i) {
    for (Eigen::Index j = 0; j < z2.cols(); ++j) probe(p2, i, j, (*analytic.grad_z2)(i, j));
  }
  return worst;
}

double finite_difference_check(Objective objective, const EmbeddingBatch& z1,
                               const EmbeddingBatch& z2, std::span<const int> labels,
                               const ObjectiveConfig& cfg, double h) {
  const std::vector<int> owned(labels.begin(), labels.end());
  return finite_difference_check(
      [&](const EmbeddingBatch& a, const EmbeddingBatch& b) {
        return evaluate_objective(objective, a, b, owned, cfg);
      },
      z1, z2, h);
}

}  // namespace birdssl
